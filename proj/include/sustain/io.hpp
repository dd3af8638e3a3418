#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sustain/evaluation.hpp"
#include "sustain/model.hpp"
#include "sustain/solver.hpp"
#include "sustain/sparse_tensor.hpp"

namespace sustain::io {

inline constexpr int kFormatVersion = 1;

enum class FileFormat { text, binary };

// ---------------------------------------------------------------------------
// Tensors
// ---------------------------------------------------------------------------

/// Reads a FROSTT-style .tns file: '#' comment lines, then one nonzero per
/// line as d 1-based indices followed by a value. Dims are the per-mode
/// maximum index unless a "# dims: I1 I2 ..." comment gives them. Duplicate
/// coordinates are summed. Binary files written by save_tensor are detected
/// by their magic bytes.
SparseTensor load_tensor(const std::filesystem::path& path);

/// Writes a "# dims:" header and one 1-based line per nonzero, values in
/// shortest round-trip form.
void save_tensor(const std::filesystem::path& path, const SparseTensor& t,
                 FileFormat format = FileFormat::text);

SparseTensor parse_tensor(const std::string& text, const std::string& source = "<memory>");
std::string format_tensor(const SparseTensor& t);

// ---------------------------------------------------------------------------
// Factor file sets
// ---------------------------------------------------------------------------

struct ModelMetadata {
    int format_version = kFormatVersion;
    std::vector<std::size_t> dims;
    std::size_t rank = 0;
    int tau = 0;
    std::optional<std::uint64_t> seed;
    std::optional<double> fit;
};

struct LoadedModel {
    IntegerFactorModel model;
    ModelMetadata metadata;
};

/// Text layout inside `dir`: factor_<n>.txt for modes n = 1..d (one row per line), lambda.txt
/// and model.meta (key=value). Binary layout: a single model.bin.
void save_model(const std::filesystem::path& dir, const IntegerFactorModel& model,
                std::optional<std::uint64_t> seed, std::optional<double> fit,
                FileFormat format = FileFormat::text);

/// Loads either layout and validates the model invariants and the header
/// against the loaded factors.
LoadedModel load_model(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Columns: sweep,objective,fit,seconds,zero_lock_repairs.
void write_trace_csv(const std::filesystem::path& path, const SolverTrace& trace);
std::string format_trace_csv(const SolverTrace& trace);

std::string stability_report_json(const StabilityReport& report);
void write_stability_report(const std::filesystem::path& path, const StabilityReport& report);

/// One name per line; blank lines keep their index.
std::vector<std::string> load_feature_names(const std::filesystem::path& path);

/// Score table of each component of mode `mode`: nonzero entries sorted by
/// descending score, with the prevalence of the component among mode-0 rows.
std::string format_score_table(const IntegerFactorModel& model, std::size_t mode,
                               const std::vector<std::string>& names);

// ---------------------------------------------------------------------------
// Run manifests
// ---------------------------------------------------------------------------

struct RunManifest {
    int format_version = kFormatVersion;
    std::string command;
    std::string input;
    std::string output;
    /// Remaining command-line flags, in order, for replay.
    std::vector<std::string> arguments;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

/// Throws IoError on a version mismatch or a missing input file.
RunManifest read_manifest(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& contents);
std::string read_text_file(const std::filesystem::path& path);

} // namespace sustain::io
