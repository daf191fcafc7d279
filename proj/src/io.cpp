#include "twinseg/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "twinseg/error.hpp"

namespace twinseg::io {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

std::string where(std::string_view source, std::size_t line_no) {
  return std::string(source) + ":" + std::to_string(line_no);
}

double parse_double(std::string_view tok, std::string_view source, std::size_t line_no) {
  double v = 0.0;
  // from_chars rejects a leading '+', which some writers emit.
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw Error(ErrorCode::ParseError,
                where(source, line_no) + ": not a number: '" + std::string(tok) + "'");
  }
  return v;
}

long parse_int(std::string_view tok, std::string_view source, std::size_t line_no) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw Error(ErrorCode::ParseError,
                where(source, line_no) + ": not an integer: '" + std::string(tok) + "'");
  }
  return v;
}

enum class Field { X, Y, Z, Intensity, Class, Instance, Confidence, Boundary, Ignored };

Field field_from_name(std::string_view name) {
  if (name == "x") return Field::X;
  if (name == "y") return Field::Y;
  if (name == "z") return Field::Z;
  if (name == "intensity") return Field::Intensity;
  if (name == "class" || name == "class_id" || name == "label") return Field::Class;
  if (name == "instance" || name == "instance_id") return Field::Instance;
  if (name == "confidence") return Field::Confidence;
  if (name == "boundary") return Field::Boundary;
  return Field::Ignored;
}

/// Accumulates parsed records into a cloud and (when labeled) a labeling.
class RecordSink {
 public:
  RecordSink(std::vector<Field> fields, std::string_view source)
      : fields_(std::move(fields)), source_(source) {
    for (Field f : fields_) {
      has_intensity_ |= f == Field::Intensity;
      has_class_ |= f == Field::Class;
      has_instance_ |= f == Field::Instance;
      has_confidence_ |= f == Field::Confidence;
      has_boundary_ |= f == Field::Boundary;
    }
    if (std::count(fields_.begin(), fields_.end(), Field::X) != 1 ||
        std::count(fields_.begin(), fields_.end(), Field::Y) != 1 ||
        std::count(fields_.begin(), fields_.end(), Field::Z) != 1) {
      throw Error(ErrorCode::ParseError, std::string(source) + ": fields must include x y z once");
    }
    if (has_class_ != has_instance_) {
      throw Error(ErrorCode::ParseError,
                  std::string(source) + ": class and instance columns must appear together");
    }
  }

  [[nodiscard]] std::size_t width() const { return fields_.size(); }
  [[nodiscard]] bool labeled() const { return has_class_; }

  void add(const std::vector<std::string_view>& toks, std::size_t line_no) {
    if (toks.size() != fields_.size()) {
      throw Error(ErrorCode::ParseError, where(source_, line_no) + ": expected " +
                                             std::to_string(fields_.size()) + " fields, found " +
                                             std::to_string(toks.size()));
    }
    Point3 p;
    double intensity = 0.0;
    for (std::size_t k = 0; k < toks.size(); ++k) {
      switch (fields_[k]) {
        case Field::X: p.x = parse_double(toks[k], source_, line_no); break;
        case Field::Y: p.y = parse_double(toks[k], source_, line_no); break;
        case Field::Z: p.z = parse_double(toks[k], source_, line_no); break;
        case Field::Intensity: intensity = parse_double(toks[k], source_, line_no); break;
        case Field::Class: {
          const long c = parse_int(toks[k], source_, line_no);
          if (c < 0 || c >= static_cast<long>(kNumClasses)) {
            throw Error(ErrorCode::ParseError, where(source_, line_no) + ": class id outside 0..7");
          }
          classes_.push_back(static_cast<ClassLabel>(c));
          break;
        }
        case Field::Instance: {
          const long id = parse_int(toks[k], source_, line_no);
          if (id < 0 || id > static_cast<long>(UINT32_MAX)) {
            throw Error(ErrorCode::ParseError, where(source_, line_no) + ": instance id out of range");
          }
          instances_.push_back(static_cast<InstanceId>(id));
          break;
        }
        case Field::Confidence: {
          const double c = parse_double(toks[k], source_, line_no);
          if (!(c >= 0.0 && c <= 1.0)) {
            throw Error(ErrorCode::ParseError, where(source_, line_no) + ": confidence outside [0,1]");
          }
          confidence_.push_back(c);
          break;
        }
        case Field::Boundary: {
          const long b = parse_int(toks[k], source_, line_no);
          if (b != 0 && b != 1) {
            throw Error(ErrorCode::ParseError, where(source_, line_no) + ": boundary flag must be 0 or 1");
          }
          boundary_.push_back(static_cast<std::uint8_t>(b));
          break;
        }
        case Field::Ignored: break;
      }
    }
    if (!p.finite()) {
      throw Error(ErrorCode::InvalidCoordinate, where(source_, line_no) + ": non-finite coordinate");
    }
    if (has_intensity_) {
      cloud_.push_back(p, intensity);
    } else {
      cloud_.push_back(p);
    }
  }

  LabeledCloud finish() && {
    LabeledCloud out;
    const std::size_t n = cloud_.size();
    out.cloud = std::move(cloud_);
    if (has_class_) {
      Labeling l;
      l.classes = std::move(classes_);
      l.instances = std::move(instances_);
      l.confidence = has_confidence_ ? std::move(confidence_) : std::vector<double>(n, 1.0);
      l.boundary = has_boundary_ ? std::move(boundary_) : std::vector<std::uint8_t>(n, 0);
      out.labeling = std::move(l);
    }
    return out;
  }

 private:
  std::vector<Field> fields_;
  std::string_view source_;
  bool has_intensity_ = false, has_class_ = false, has_instance_ = false;
  bool has_confidence_ = false, has_boundary_ = false;
  PointCloud cloud_;
  std::vector<ClassLabel> classes_;
  std::vector<InstanceId> instances_;
  std::vector<double> confidence_;
  std::vector<std::uint8_t> boundary_;
};

std::vector<Field> inferred_fields(std::size_t columns, std::string_view source, std::size_t line_no) {
  using F = Field;
  switch (columns) {
    case 3: return {F::X, F::Y, F::Z};
    case 4: return {F::X, F::Y, F::Z, F::Intensity};
    case 5: return {F::X, F::Y, F::Z, F::Class, F::Instance};
    case 6: return {F::X, F::Y, F::Z, F::Intensity, F::Class, F::Instance};
    default:
      throw Error(ErrorCode::ParseError, where(source, line_no) + ": expected 3 to 6 fields, found " +
                                             std::to_string(columns));
  }
}

void append_fixed(std::string& buf, double v) {
  char tmp[64];
  const auto res = std::to_chars(tmp, tmp + sizeof(tmp), v, std::chars_format::fixed, 6);
  buf.append(tmp, res.ptr);
}

void append_uint(std::string& buf, unsigned long v) {
  char tmp[32];
  const auto res = std::to_chars(tmp, tmp + sizeof(tmp), v);
  buf.append(tmp, res.ptr);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace

std::string Columns::header() const {
  std::string h = "# fields: x y z";
  if (intensity) h += " intensity";
  if (labels) h += " class instance";
  if (confidence) h += " confidence";
  if (boundary) h += " boundary";
  return h;
}

LabeledCloud read_xyz(std::istream& in, bool require_labels, std::string_view source) {
  std::optional<RecordSink> sink;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.front().starts_with('#')) {
      // "# fields: a b c" declares the schema; other comments are ignored.
      std::vector<std::string_view> rest(toks.begin() + 1, toks.end());
      if (toks.front() == "#fields:" || (toks.front() == "#" && !rest.empty() && rest.front() == "fields:")) {
        if (toks.front() == "#") rest.erase(rest.begin());
        if (sink) throw Error(ErrorCode::ParseError, where(source, line_no) + ": fields declared after data");
        std::vector<Field> fields;
        for (auto name : rest) fields.push_back(field_from_name(name));
        sink.emplace(std::move(fields), source);
      }
      continue;
    }
    if (!sink) sink.emplace(inferred_fields(toks.size(), source, line_no), source);
    sink->add(toks, line_no);
  }
  if (in.bad()) throw Error(ErrorCode::IoError, std::string(source) + ": read failure");
  if (!sink) return {};
  if (require_labels && !sink->labeled()) {
    throw Error(ErrorCode::MissingLabels, std::string(source) + ": file has no class/instance columns");
  }
  return std::move(*sink).finish();
}

LabeledCloud read_xyz(const std::filesystem::path& path, bool require_labels) {
  auto in = open_input(path);
  const std::string name = path.string();
  return read_xyz(in, require_labels, name);
}

PcdReadResult read_pcd_ascii(std::istream& in, std::string_view source) {
  std::vector<std::string> names;
  std::vector<std::size_t> counts;
  std::optional<std::size_t> width, height, points;
  std::string line;
  std::size_t line_no = 0;
  bool data_seen = false;
  while (!data_seen && std::getline(in, line)) {
    ++line_no;
    const auto toks = split_ws(line);
    if (toks.empty() || toks.front().starts_with('#')) continue;
    const std::string_view key = toks.front();
    auto size_value = [&](std::size_t k) -> std::size_t {
      if (toks.size() <= k) throw Error(ErrorCode::ParseError, where(source, line_no) + ": missing value");
      const long v = parse_int(toks[k], source, line_no);
      if (v < 0) throw Error(ErrorCode::ParseError, where(source, line_no) + ": negative value");
      return static_cast<std::size_t>(v);
    };
    if (key == "FIELDS") {
      for (std::size_t k = 1; k < toks.size(); ++k) names.emplace_back(toks[k]);
    } else if (key == "COUNT") {
      for (std::size_t k = 1; k < toks.size(); ++k) counts.push_back(size_value(k));
    } else if (key == "WIDTH") {
      width = size_value(1);
    } else if (key == "HEIGHT") {
      height = size_value(1);
    } else if (key == "POINTS") {
      points = size_value(1);
    } else if (key == "DATA") {
      if (toks.size() < 2) throw Error(ErrorCode::ParseError, where(source, line_no) + ": DATA without encoding");
      if (toks[1] != "ascii") {
        throw Error(ErrorCode::UnsupportedEncoding,
                    where(source, line_no) + ": DATA " + std::string(toks[1]) + " is not supported");
      }
      data_seen = true;
    } else if (key == "VERSION" || key == "SIZE" || key == "TYPE" || key == "VIEWPOINT") {
      // Not needed for ASCII decoding.
    } else {
      throw Error(ErrorCode::ParseError, where(source, line_no) + ": unknown header key '" + std::string(key) + "'");
    }
  }
  if (!data_seen) throw Error(ErrorCode::ParseError, std::string(source) + ": missing DATA line");
  if (names.empty()) throw Error(ErrorCode::ParseError, std::string(source) + ": missing FIELDS");
  if (counts.empty()) counts.assign(names.size(), 1);
  if (counts.size() != names.size()) {
    throw Error(ErrorCode::ParseError, std::string(source) + ": COUNT does not match FIELDS");
  }
  if (!points) {
    if (!width) throw Error(ErrorCode::ParseError, std::string(source) + ": missing POINTS and WIDTH");
    points = *width * height.value_or(1);
  }
  if (width && *width * height.value_or(1) != *points) {
    throw Error(ErrorCode::ParseError, std::string(source) + ": WIDTH*HEIGHT does not match POINTS");
  }

  PcdReadResult result;
  std::vector<Field> columns;
  for (std::size_t k = 0; k < names.size(); ++k) {
    Field f = field_from_name(names[k]);
    if (f == Field::Confidence || f == Field::Boundary || counts[k] != 1) f = Field::Ignored;
    if (f == Field::Ignored) ++result.ignored_fields;
    for (std::size_t c = 0; c < counts[k]; ++c) columns.push_back(f);
  }
  RecordSink sink(std::move(columns), source);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    ++rows;
    if (rows > *points) break;
    sink.add(toks, line_no);
  }
  if (rows != *points) {
    throw Error(ErrorCode::ParseError, std::string(source) + ": POINTS " + std::to_string(*points) +
                                           " but found " + (rows > *points ? "more" : std::to_string(rows)) +
                                           " data lines");
  }
  result.data = std::move(sink).finish();
  return result;
}

PcdReadResult read_pcd_ascii(const std::filesystem::path& path) {
  auto in = open_input(path);
  const std::string name = path.string();
  return read_pcd_ascii(in, name);
}

Format format_for(const std::filesystem::path& path) {
  return path.extension() == ".pcd" ? Format::Pcd : Format::Xyz;
}

LabeledCloud read_cloud(const std::filesystem::path& path, bool require_labels) {
  if (format_for(path) == Format::Pcd) {
    auto res = read_pcd_ascii(path);
    if (require_labels && !res.data.labeling) {
      throw Error(ErrorCode::MissingLabels, path.string() + ": file has no class/instance fields");
    }
    return std::move(res.data);
  }
  return read_xyz(path, require_labels);
}

void write_labeled(std::ostream& out, const PointCloud& cloud, const Labeling* labeling,
                   Format format, Columns extra) {
  Columns cols;
  cols.intensity = cloud.has_intensity();
  cols.labels = labeling != nullptr;
  cols.confidence = cols.labels && extra.confidence;
  cols.boundary = cols.labels && extra.boundary;
  if (labeling) labeling->validate(cloud.size());

  std::string buf;
  if (format == Format::Xyz) {
    buf = cols.header() + "\n";
  } else {
    std::string fields = "x y z", size = "8 8 8", type = "F F F", count = "1 1 1";
    auto add = [&](const char* name, const char* sz, const char* ty) {
      fields += std::string(" ") + name;
      size += std::string(" ") + sz;
      type += std::string(" ") + ty;
      count += " 1";
    };
    if (cols.intensity) add("intensity", "8", "F");
    if (cols.labels) {
      add("class", "1", "U");
      add("instance", "4", "U");
    }
    const std::string n = std::to_string(cloud.size());
    buf = "# .PCD v0.7 - Point Cloud Data file format\nVERSION 0.7\nFIELDS " + fields + "\nSIZE " + size +
          "\nTYPE " + type + "\nCOUNT " + count + "\nWIDTH " + n + "\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\nPOINTS " +
          n + "\nDATA ascii\n";
    cols.confidence = cols.boundary = false;
  }
  out << buf;

  buf.clear();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud[i];
    append_fixed(buf, p.x);
    buf += ' ';
    append_fixed(buf, p.y);
    buf += ' ';
    append_fixed(buf, p.z);
    if (cols.intensity) {
      buf += ' ';
      append_fixed(buf, cloud.intensity()[i]);
    }
    if (cols.labels) {
      buf += ' ';
      append_uint(buf, static_cast<unsigned long>(class_code(labeling->classes[i])));
      buf += ' ';
      append_uint(buf, labeling->instances[i]);
    }
    if (cols.confidence) {
      buf += ' ';
      append_fixed(buf, labeling->confidence[i]);
    }
    if (cols.boundary) {
      buf += ' ';
      append_uint(buf, labeling->boundary[i]);
    }
    buf += '\n';
    if (buf.size() > (1u << 16)) {
      out << buf;
      buf.clear();
    }
  }
  out << buf;
}

void write_labeled(const std::filesystem::path& path, const PointCloud& cloud, const Labeling* labeling,
                   Format format, Columns extra) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  write_labeled(out, cloud, labeling, format, extra);
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

}  // namespace twinseg::io
