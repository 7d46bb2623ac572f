#include "vpr/io.hpp"

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace vpr {

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

// Little-endian scalar access; the build targets are little-endian, keep the
// byte-level copies anyway so the format stays pinned.
template <typename T>
void append_le(std::string& out, T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T read_le(const std::string& bytes, size_t& offset) {
    if (offset + sizeof(T) > bytes.size()) {
        throw Error(ErrorCode::TruncatedPayload,
                    "unexpected end of file at byte " + std::to_string(offset));
    }
    T value;
    std::memcpy(&value, bytes.data() + offset, sizeof(T));
    offset += sizeof(T);
    return value;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : text) {
        if (c == '\n') {
            if (!current.empty() && current.back() == '\r') current.pop_back();
            lines.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) {
        if (current.back() == '\r') current.pop_back();
        lines.push_back(current);
    }
    return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(current);
    return fields;
}

bool is_blank(const std::string& line) {
    for (char c : line) {
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

double parse_double(const std::string& field, size_t line_no) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        throw Error(ErrorCode::ParseError,
                    "line " + std::to_string(line_no) + ": bad number '" + field + "'");
    }
    return value;
}

bool looks_like_text(const std::string& bytes) {
    const size_t probe = std::min<size_t>(bytes.size(), 512);
    for (size_t i = 0; i < probe; ++i) {
        const unsigned char c = static_cast<unsigned char>(bytes[i]);
        if (c == '\n' || c == '\r' || c == '\t') continue;
        if (c < 0x20) return false;
    }
    return true;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

DescriptorSet parse_descriptors_binary(const std::string& bytes) {
    size_t offset = sizeof(kDescriptorMagic);
    const uint64_t count = read_le<uint64_t>(bytes, offset);
    const uint32_t dim = read_le<uint32_t>(bytes, offset);
    if (count == 0 || dim == 0) {
        throw Error(ErrorCode::ParseError, "descriptor file declares an empty set");
    }

    DescriptorSet set;
    set.ids.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        const uint32_t len = read_le<uint32_t>(bytes, offset);
        if (offset + len > bytes.size()) {
            throw Error(ErrorCode::TruncatedPayload,
                        "id table ends inside entry " + std::to_string(i));
        }
        set.ids.emplace_back(bytes.data() + offset, len);
        offset += len;
    }

    const uint64_t payload = count * static_cast<uint64_t>(dim) * 4;
    if (offset + payload > bytes.size()) {
        throw Error(ErrorCode::TruncatedPayload,
                    "payload needs " + std::to_string(payload) + " bytes, file has " +
                        std::to_string(bytes.size() - offset));
    }

    set.values.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
    for (uint64_t i = 0; i < count; ++i) {
        for (uint32_t d = 0; d < dim; ++d) {
            float v;
            std::memcpy(&v, bytes.data() + offset, 4);
            offset += 4;
            set.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = v;
        }
    }
    return set;
}

DescriptorSet parse_descriptors_text(const std::string& bytes) {
    const auto lines = split_lines(bytes);
    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;
    Eigen::Index dim = -1;
    for (size_t n = 0; n < lines.size(); ++n) {
        if (is_blank(lines[n])) continue;
        const auto fields = split_fields(lines[n]);
        if (fields.size() < 2) {
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(n + 1) + ": expected id,v1,...,vD");
        }
        std::vector<double> row;
        row.reserve(fields.size() - 1);
        for (size_t f = 1; f < fields.size(); ++f) row.push_back(parse_double(fields[f], n + 1));
        if (dim < 0) {
            dim = static_cast<Eigen::Index>(row.size());
        } else if (static_cast<Eigen::Index>(row.size()) != dim) {
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(n + 1) + ": expected " + std::to_string(dim) +
                            " values, got " + std::to_string(row.size()));
        }
        ids.push_back(fields[0]);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(ErrorCode::ParseError, "no descriptor rows");

    DescriptorSet set;
    set.ids = std::move(ids);
    set.values.resize(static_cast<Eigen::Index>(rows.size()), dim);
    for (size_t i = 0; i < rows.size(); ++i) {
        for (Eigen::Index d = 0; d < dim; ++d) {
            set.values(static_cast<Eigen::Index>(i), d) = rows[i][static_cast<size_t>(d)];
        }
    }
    return set;
}

} // namespace

DescriptorSet load_descriptors(const std::string& path) {
    const std::string bytes = read_file(path);
    if (bytes.size() >= sizeof(kDescriptorMagic) &&
        std::memcmp(bytes.data(), kDescriptorMagic, sizeof(kDescriptorMagic)) == 0) {
        return parse_descriptors_binary(bytes);
    }
    if (!looks_like_text(bytes)) {
        throw Error(ErrorCode::BadMagic, path + " is not a descriptor file");
    }
    try {
        return parse_descriptors_text(bytes);
    } catch (const Error& e) {
        // A first-line failure on non-CSV content means the file was most
        // likely meant to be binary with a corrupt header.
        if (e.code() == ErrorCode::ParseError &&
            std::string(e.what()).find("line 1:") != std::string::npos) {
            throw Error(ErrorCode::BadMagic, path + " is not a descriptor file");
        }
        throw;
    }
}

void save_descriptors(const std::string& path, const DescriptorSet& set) {
    if (set.size() == 0) throw Error(ErrorCode::InvalidConfig, "refusing to save an empty set");
    std::string out;
    out.append(kDescriptorMagic, sizeof(kDescriptorMagic));
    append_le<uint64_t>(out, static_cast<uint64_t>(set.size()));
    append_le<uint32_t>(out, static_cast<uint32_t>(set.dim()));
    for (const auto& id : set.ids) {
        append_le<uint32_t>(out, static_cast<uint32_t>(id.size()));
        out.append(id);
    }
    for (Eigen::Index i = 0; i < set.size(); ++i) {
        for (Eigen::Index d = 0; d < set.dim(); ++d) {
            append_le<float>(out, static_cast<float>(set.values(i, d)));
        }
    }
    write_file(path, out);
}

void save_descriptors_text(const std::string& path, const DescriptorSet& set) {
    std::string out;
    for (Eigen::Index i = 0; i < set.size(); ++i) {
        out += set.ids[static_cast<size_t>(i)];
        for (Eigen::Index d = 0; d < set.dim(); ++d) {
            out += ',';
            out += format_double(set.values(i, d));
        }
        out += '\n';
    }
    write_file(path, out);
}

PoseSet load_poses(const std::string& path) {
    const auto lines = split_lines(read_file(path));
    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;
    Eigen::Index dim = -1;
    for (size_t n = 0; n < lines.size(); ++n) {
        if (is_blank(lines[n])) continue;
        const auto fields = split_fields(lines[n]);
        if (fields.size() != 3 && fields.size() != 4) {
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(n + 1) + ": expected id,x,y[,z]");
        }
        std::vector<double> row;
        for (size_t f = 1; f < fields.size(); ++f) row.push_back(parse_double(fields[f], n + 1));
        if (dim < 0) {
            dim = static_cast<Eigen::Index>(row.size());
        } else if (static_cast<Eigen::Index>(row.size()) != dim) {
            throw Error(ErrorCode::MixedDimensions,
                        "line " + std::to_string(n + 1) + ": " + std::to_string(row.size()) +
                            "D row in a " + std::to_string(dim) + "D file");
        }
        ids.push_back(fields[0]);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(ErrorCode::ParseError, "no pose rows in " + path);

    PoseSet set;
    set.ids = std::move(ids);
    set.coords.resize(static_cast<Eigen::Index>(rows.size()), dim);
    for (size_t i = 0; i < rows.size(); ++i) {
        for (Eigen::Index d = 0; d < dim; ++d) {
            set.coords(static_cast<Eigen::Index>(i), d) = rows[i][static_cast<size_t>(d)];
        }
    }
    return set;
}

void save_poses(const std::string& path, const PoseSet& set) {
    std::string out;
    for (Eigen::Index i = 0; i < set.size(); ++i) {
        out += set.ids[static_cast<size_t>(i)];
        for (Eigen::Index d = 0; d < set.dim(); ++d) {
            out += ',';
            out += format_double(set.coords(i, d));
        }
        out += '\n';
    }
    write_file(path, out);
}

std::vector<UncertaintyRecord> load_external_scores(const std::string& path,
                                                    const std::string& name,
                                                    ScorePolarity polarity) {
    const auto lines = split_lines(read_file(path));
    size_t n = 0;
    while (n < lines.size() && is_blank(lines[n])) ++n;
    if (n == lines.size() || lines[n] != "query_id,score") {
        throw Error(ErrorCode::ParseError, "missing 'query_id,score' header in " + path);
    }
    ++n;

    std::vector<UncertaintyRecord> records;
    std::set<std::string> seen;
    for (; n < lines.size(); ++n) {
        if (is_blank(lines[n])) continue;
        const auto fields = split_fields(lines[n]);
        if (fields.size() != 2) {
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(n + 1) + ": expected query_id,score");
        }
        if (!seen.insert(fields[0]).second) {
            throw Error(ErrorCode::DuplicateQueryId,
                        "query '" + fields[0] + "' appears twice in " + path);
        }
        const double value = parse_double(fields[1], n + 1);
        UncertaintyRecord rec;
        rec.query_id = fields[0];
        rec.method = Method::External;
        rec.channel = name;
        if (polarity == ScorePolarity::Confidence) {
            rec.gv_confidence = value;
            rec.score = -value;
        } else {
            rec.score = value;
        }
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw Error(ErrorCode::ParseError, "no score rows in " + path);
    return records;
}

void save_scores(const std::string& path,
                 const std::vector<std::pair<std::string, double>>& rows) {
    std::string out = "query_id,score\n";
    for (const auto& [id, score] : rows) {
        out += id;
        out += ',';
        out += format_double(score);
        out += '\n';
    }
    write_file(path, out);
}

} // namespace vpr
