#pragma once

#include "sf/acoustic.hpp"
#include "sf/diffusion.hpp"

namespace sf {

struct BenchLine {
    std::string scenario;
    std::string variant; // interpreter | jit
    std::string plan;    // blocking plan or "unblocked"
    int runs;
    double median_s;
};

// Median-of-n timings with an untimed warmup run per variant; buffers are
// restored between runs so every run sees identical inputs.
std::vector<BenchLine> bench_diffusion(const DiffusionConfig& cfg,
                                       std::span<const BlockingPlan> plans,
                                       int runs = 3,
                                       bool include_interpreter = true);

std::vector<BenchLine> bench_acoustic(const AcousticModel& model,
                                      std::span<const BlockingPlan> plans,
                                      int runs = 3);

// machine-readable: one line per variant
std::string format_bench(std::span<const BenchLine> lines);

// Default blocking candidates: {8,16,32,64} per blockable dimension (the
// innermost simd dimension stays unblocked) plus the unblocked plan.
std::vector<BlockingPlan> default_block_candidates(int spatial_dims);

// True when the scenario footprint does not fit the machine (used to report
// SkippedTooLarge instead of thrashing).
bool exceeds_memory(size_t bytes);

} // namespace sf
