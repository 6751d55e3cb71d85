#pragma once

#include <filesystem>
#include <vector>

#include "mixsum/dataset.hpp"
#include "mixsum/gmm.hpp"
#include "mixsum/mixture.hpp"

namespace mixsum {

// Draw-bundle files are JSON lines: a metadata header
//   {"model":str,"d":int,"M":int,"seed":int}
// followed by one draw per line
//   {"m":int,"family":"gaussian_uni"|"gaussian_multi"|"beta",
//    "weights":[..],"params":[{"mean":..,"var":..} | {"mean":[..],"cov":[[..]]}
//                             | {"alpha":..,"beta":..}]}
// Parse failures carry the offending line number.
DrawBundle ingest_bundle(const std::filesystem::path& path);
void export_bundle(const DrawBundle& bundle, const std::filesystem::path& path);

// Datasets are headerless CSV, one observation per row, d columns, optional
// final integer label column when `labeled` is set. Lines starting with '#'
// are skipped.
Dataset read_dataset_csv(const std::filesystem::path& path, bool labeled = false);
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path,
                       bool with_labels = true);

// Summaries reuse the bundle line shape plus "k" and "loglik" fields.
void write_summaries(const std::vector<GmmSummary>& summaries,
                     const std::filesystem::path& path,
                     const std::vector<int>* draw_indices = nullptr);
std::vector<GmmSummary> read_summaries(const std::filesystem::path& path,
                                       std::vector<int>* draw_indices = nullptr);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace mixsum
