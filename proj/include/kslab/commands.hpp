#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "kslab/checks.hpp"
#include "kslab/config.hpp"

namespace kslab {

enum ExitCode : int { kExitOk = 0, kExitCheck = 1, kExitConfig = 2, kExitIo = 3 };

/// %.17g; absent values are written as empty fields by the callers.
std::string format_double(double x);

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(const std::string& s);

/// Writes every (name, content) pair into `dir` under a temporary name and
/// renames them only once all writes succeeded. Throws IoError; on failure
/// no file of the batch is left behind.
void write_files_atomically(const std::filesystem::path& dir,
                            const std::vector<std::pair<std::string, std::string>>& files);

/// series.csv body for annotated rows.
std::string series_csv(const std::vector<AnnotatedRow>& rows, const SimConfig& sim);

/// subcritical, critical, blowup_condition or uncovered.
std::string regime_label(double chi, double M, double I0);

std::string hash_hex(std::uint64_t h);

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& log);
int cmd_sweep(const ExperimentConfig& cfg, int jobs, std::ostream& log);
int cmd_bounds(const ExperimentConfig& cfg, std::ostream& log);
int cmd_inequalities(const ExperimentConfig& cfg, int jobs, std::ostream& log);

/// Dispatches on cfg.command.
int run_command(const ExperimentConfig& cfg, int jobs, std::ostream& log);

}  // namespace kslab
