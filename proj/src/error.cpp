#include "twinseg/error.hpp"

namespace twinseg {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyIndex: return "EmptyIndex";
    case ErrorCode::InvalidRadius: return "InvalidRadius";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidCoordinate: return "InvalidCoordinate";
    case ErrorCode::UnsupportedEncoding: return "UnsupportedEncoding";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ReservedId: return "ReservedId";
    case ErrorCode::InvalidPartition: return "InvalidPartition";
    case ErrorCode::InvalidNoiseSpec: return "InvalidNoiseSpec";
    case ErrorCode::DegenerateNeighborhood: return "DegenerateNeighborhood";
    case ErrorCode::NoTrainingData: return "NoTrainingData";
    case ErrorCode::MissingLabels: return "MissingLabels";
    case ErrorCode::LabelConflict: return "LabelConflict";
    case ErrorCode::InvalidSweep: return "InvalidSweep";
    case ErrorCode::UndefinedIoU: return "UndefinedIoU";
    case ErrorCode::EmptyFacility: return "EmptyFacility";
    case ErrorCode::MissingRate: return "MissingRate";
    case ErrorCode::InvalidCounts: return "InvalidCounts";
    case ErrorCode::InvalidCurve: return "InvalidCurve";
    case ErrorCode::InvalidPrimitive: return "InvalidPrimitive";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidParams: return "InvalidParams";
  }
  return "Unknown";
}

}  // namespace twinseg
