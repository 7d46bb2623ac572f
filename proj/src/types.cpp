#include "vpr/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace vpr {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::IdMismatch: return "IdMismatch";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::MixedDimensions: return "MixedDimensions";
        case ErrorCode::KTooLarge: return "KTooLarge";
        case ErrorCode::EmptyMatches: return "EmptyMatches";
        case ErrorCode::NeedTwoNeighbors: return "NeedTwoNeighbors";
        case ErrorCode::MissingDensity: return "MissingDensity";
        case ErrorCode::ZeroWeightSum: return "ZeroWeightSum";
        case ErrorCode::EmptyTrainingSet: return "EmptyTrainingSet";
        case ErrorCode::SingleClassTraining: return "SingleClassTraining";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::MissingQueryPose: return "MissingQueryPose";
        case ErrorCode::NoPositives: return "NoPositives";
        case ErrorCode::NonFiniteScore: return "NonFiniteScore";
        case ErrorCode::QueryCoverageMismatch: return "QueryCoverageMismatch";
        case ErrorCode::DuplicateQueryId: return "DuplicateQueryId";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::TruncatedPayload: return "TruncatedPayload";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::InvalidPartition: return "InvalidPartition";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

std::string method_name(Method m) {
    switch (m) {
        case Method::L2: return "l2";
        case Method::PA: return "pa";
        case Method::SUE: return "sue";
        case Method::SUE_DC: return "sue_dc";
        case Method::External: return "external";
    }
    return "unknown";
}

RankedMatches RankedMatches::head(Eigen::Index k) const {
    if (k < 1 || k > size()) {
        throw Error(ErrorCode::KTooLarge,
                    "requested prefix " + std::to_string(k) + " of " +
                        std::to_string(size()) + " neighbors");
    }
    RankedMatches out;
    out.query_id = query_id;
    out.reference_ids.assign(reference_ids.begin(), reference_ids.begin() + k);
    out.distances = distances.head(k);
    out.poses = poses.topRows(k);
    return out;
}

namespace {

std::vector<std::string> sorted_duplicates(const std::vector<std::string>& ids) {
    std::map<std::string, int> counts;
    for (const auto& id : ids) ++counts[id];
    std::vector<std::string> dups;
    for (const auto& [id, n] : counts) {
        if (n > 1) dups.push_back(id);
    }
    return dups;
}

void append_list(std::ostringstream& os, const std::string& label,
                 const std::vector<std::string>& items) {
    os << label << " [";
    for (size_t i = 0; i < items.size(); ++i) {
        if (i > 0) os << ", ";
        os << items[i];
    }
    os << "]";
}

} // namespace

VPRMap validate_map(DescriptorSet descriptors, PoseSet poses) {
    if (descriptors.size() == 0 || poses.size() == 0) {
        throw Error(ErrorCode::InvalidConfig, "descriptor and pose sets must be nonempty");
    }
    if (static_cast<Eigen::Index>(descriptors.ids.size()) != descriptors.size() ||
        static_cast<Eigen::Index>(poses.ids.size()) != poses.size()) {
        throw Error(ErrorCode::LengthMismatch, "id list and value rows disagree");
    }

    // Collect every problem before failing so one pass reports them all.
    const auto desc_dups = sorted_duplicates(descriptors.ids);
    const auto pose_dups = sorted_duplicates(poses.ids);
    if (!desc_dups.empty() || !pose_dups.empty()) {
        std::ostringstream os;
        if (!desc_dups.empty()) append_list(os, "duplicate descriptor ids", desc_dups);
        if (!pose_dups.empty()) {
            if (!desc_dups.empty()) os << "; ";
            append_list(os, "duplicate pose ids", pose_dups);
        }
        throw Error(ErrorCode::DuplicateId, os.str());
    }

    std::set<std::string> desc_ids(descriptors.ids.begin(), descriptors.ids.end());
    std::set<std::string> pose_ids(poses.ids.begin(), poses.ids.end());
    std::vector<std::string> only_desc, only_pose;
    std::set_difference(desc_ids.begin(), desc_ids.end(), pose_ids.begin(), pose_ids.end(),
                        std::back_inserter(only_desc));
    std::set_difference(pose_ids.begin(), pose_ids.end(), desc_ids.begin(), desc_ids.end(),
                        std::back_inserter(only_pose));
    if (!only_desc.empty() || !only_pose.empty()) {
        std::ostringstream os;
        append_list(os, "descriptor-only ids", only_desc);
        os << "; ";
        append_list(os, "pose-only ids", only_pose);
        throw Error(ErrorCode::IdMismatch, os.str());
    }

    if (descriptors.dim() < 1) {
        throw Error(ErrorCode::DimensionMismatch, "descriptor dimension must be >= 1");
    }
    if (poses.dim() != 2 && poses.dim() != 3) {
        throw Error(ErrorCode::DimensionMismatch,
                    "pose dimension must be 2 or 3, got " + std::to_string(poses.dim()));
    }

    std::vector<std::string> bad_values;
    for (Eigen::Index i = 0; i < descriptors.size(); ++i) {
        if (!descriptors.values.row(i).allFinite()) bad_values.push_back(descriptors.ids[i]);
    }
    for (Eigen::Index i = 0; i < poses.size(); ++i) {
        if (!poses.coords.row(i).allFinite()) bad_values.push_back(poses.ids[i]);
    }
    if (!bad_values.empty()) {
        std::sort(bad_values.begin(), bad_values.end());
        bad_values.erase(std::unique(bad_values.begin(), bad_values.end()), bad_values.end());
        std::ostringstream os;
        append_list(os, "non-finite values for ids", bad_values);
        throw Error(ErrorCode::NonFiniteValue, os.str());
    }

    // Align pose rows to descriptor row order so downstream code can index
    // both members with the same row number.
    std::map<std::string, Eigen::Index> pose_row;
    for (Eigen::Index i = 0; i < poses.size(); ++i) pose_row[poses.ids[i]] = i;

    PoseSet aligned;
    aligned.ids = descriptors.ids;
    aligned.coords.resize(poses.size(), poses.dim());
    for (Eigen::Index i = 0; i < descriptors.size(); ++i) {
        aligned.coords.row(i) = poses.coords.row(pose_row.at(descriptors.ids[i]));
    }

    VPRMap map;
    map.descriptors = std::move(descriptors);
    map.poses = std::move(aligned);
    return map;
}

} // namespace vpr
