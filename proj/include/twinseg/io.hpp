#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "twinseg/geometry.hpp"
#include "twinseg/labels.hpp"

namespace twinseg::io {

/// A cloud plus labels when the source carried them.
struct LabeledCloud {
  PointCloud cloud;
  std::optional<Labeling> labeling;
};

/// Optional per-point columns of the text sidecar, in canonical order:
/// `x y z [intensity] [class instance] [confidence] [boundary]`.
struct Columns {
  bool intensity = false;
  bool labels = false;
  bool confidence = false;
  bool boundary = false;

  [[nodiscard]] std::size_t count() const {
    return 3 + (intensity ? 1 : 0) + (labels ? 2 : 0) + (confidence ? 1 : 0) + (boundary ? 1 : 0);
  }
  [[nodiscard]] std::string header() const;
};

/// Reads whitespace-separated text points. A `# fields: ...` comment declares
/// the columns; without it 3/4 columns mean xyz[intensity] and 5/6 columns mean
/// xyz[intensity] class instance. With `require_labels` a file lacking class
/// and instance columns is rejected with MissingLabels.
///
/// Errors: ParseError (with line number), InvalidCoordinate, IoError.
[[nodiscard]] LabeledCloud read_xyz(const std::filesystem::path& path, bool require_labels = false);
[[nodiscard]] LabeledCloud read_xyz(std::istream& in, bool require_labels = false,
                                    std::string_view source = "<stream>");

struct PcdReadResult {
  LabeledCloud data;
  /// Header fields other than x y z intensity class instance; their values are skipped.
  std::size_t ignored_fields = 0;
};

/// ASCII PCD subset. DATA binary -> UnsupportedEncoding; header or point-count
/// inconsistencies -> ParseError.
[[nodiscard]] PcdReadResult read_pcd_ascii(const std::filesystem::path& path);
[[nodiscard]] PcdReadResult read_pcd_ascii(std::istream& in, std::string_view source = "<stream>");

enum class Format { Xyz, Pcd };

/// Format from extension: `.pcd` -> Pcd, anything else -> Xyz.
[[nodiscard]] Format format_for(const std::filesystem::path& path);

/// Reads either format; labels are required when `require_labels` is set.
[[nodiscard]] LabeledCloud read_cloud(const std::filesystem::path& path, bool require_labels = false);

/// Writes points with optional labels. Coordinates, intensity and confidence
/// use fixed 6-decimal formatting so identical inputs give identical bytes.
/// When `labeling` is empty only geometry columns are written.
void write_labeled(std::ostream& out, const PointCloud& cloud, const Labeling* labeling,
                   Format format, Columns extra = {});
void write_labeled(const std::filesystem::path& path, const PointCloud& cloud,
                   const Labeling* labeling, Format format, Columns extra = {});

}  // namespace twinseg::io
