#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "segprof/features.hpp"
#include "segprof/ward.hpp"

namespace fixture {

/// Wraps a matrix with placeholder column metadata and identity scaling.
segprof::FeatureMatrix features(const segprof::Matrix& m);

/// Random n x d matrix. With mixed = true each column is continuous,
/// ordinal (codes 1..4) or binary, and every column is z-scored.
segprof::Matrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t d, bool mixed);

segprof::ClusterAssignment assignment(const std::vector<int>& labels);

/// Fresh empty directory under the system temp directory.
std::filesystem::path temp_dir(const std::string& name);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace fixture
