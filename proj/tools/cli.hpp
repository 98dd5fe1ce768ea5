#pragma once

#include "splatc/corpus.hpp"
#include "splatc/fitter.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace splatc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitBadInput = 1;
inline constexpr int kExitDiverged = 2;
inline constexpr int kExitWriteFailed = 3;

struct SweepSpec {
    std::vector<std::size_t> splat_counts{400, 784, 1600, 3136, 4900};
    std::vector<InitStrategy> init_strategies{InitStrategy::Structured, InitStrategy::Random};
    std::vector<double> prune_ratios{0.0, 0.2, 0.5, 0.8};
    /// Template for every run; num_gaussians, init_strategy and prune are overwritten.
    FitConfig base;

    void check() const;
};

struct SweepRow {
    std::string image;
    std::size_t n_gaussians = 0;
    InitStrategy init = InitStrategy::Structured;
    double requested_prune_ratio = 0.0;
    double prune_ratio = 0.0; // achieved
    double l1_weight = 0.0;
    double final_psnr_db = 0.0;
    double compression_ratio = 0.0;
    double wall_time_s = 0.0;
    std::size_t alive_after_prune = 0;
    /// PSNR of the unpruned run with the same image/count/init minus this
    /// row's PSNR; NaN when the sweep has no 0 ratio.
    double psnr_drop_db = 0.0;
};

/// Runs the cartesian product image x count x init x ratio, in that nesting order.
/// `progress` (optional) receives one line per finished row.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const std::vector<CorpusImage>& corpus,
                                std::ostream* progress = nullptr);

std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Full command-line entry point. Returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

} // namespace splatc::cli
