#pragma once

#include <string>
#include <vector>

#include "vpr/types.hpp"

namespace vpr {

/// Binary descriptor container. Layout (little-endian throughout):
///   bytes 0..7   magic "VPRDESC1"
///   u64          count (N)
///   u32          dim (D)
///   N times      u32 length + that many UTF-8 bytes (descriptor id)
///   N*D floats   IEEE-754 binary32 payload, row-major
/// Values are widened to double in memory; arithmetic never runs on float32.
inline constexpr char kDescriptorMagic[8] = {'V', 'P', 'R', 'D', 'E', 'S', 'C', '1'};

/// Loads either the binary format above or the text fallback
/// (`id,v1,...,vD` per line). Files whose first bytes are not the magic are
/// parsed as text; if the very first line fails to parse and the content is
/// not printable text, the file is reported as BadMagic instead of
/// ParseError.
DescriptorSet load_descriptors(const std::string& path);

/// Writes the binary format. save then load is the identity on ids and
/// values for float32-representable values.
void save_descriptors(const std::string& path, const DescriptorSet& set);

void save_descriptors_text(const std::string& path, const DescriptorSet& set);

/// Pose CSV: `id,x,y[,z]` rows, no header, LF endings, `.` decimal.
/// Dimensionality is inferred from the first row and must be consistent.
PoseSet load_poses(const std::string& path);
void save_poses(const std::string& path, const PoseSet& set);

enum class ScorePolarity { Uncertainty, Confidence };

/// Score CSV: header `query_id,score`, one row per query, unique query ids.
/// Confidence channels keep the raw value in gv_confidence and negate it
/// into the uncertainty score.
std::vector<UncertaintyRecord> load_external_scores(const std::string& path,
                                                    const std::string& name,
                                                    ScorePolarity polarity);

void save_scores(const std::string& path,
                 const std::vector<std::pair<std::string, double>>& rows);

} // namespace vpr
