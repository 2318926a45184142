#pragma once

#include <cstdint>
#include <vector>

#include "stabcode/quantization.hpp"

namespace stabcode {

/// Memoryless erasure channel: each description is lost independently with
/// probability loss_probability, i.i.d. across descriptions and time steps.
/// The pattern is a pure function of (rng_seed, time, description), so a run
/// is reproducible and loss draws are shared across schemes or sweep cells
/// that use the same seed (common random numbers).
struct ErasureChannel {
    double loss_probability = 0.0;
    std::uint64_t rng_seed = 0;
};

/// Indices (1-based) of the descriptions that survived at one time step.
struct ReceptionRecord {
    std::uint64_t time_index = 0;
    std::vector<int> received;
};

ReceptionRecord transmit(const DescriptionSet& ds, const ErasureChannel& ch);

/// One dithered encoding duplicated into `copies` identical payloads; any
/// nonempty reception subset decodes to the same reconstruction.
DescriptionSet repetition_encode(double v, const DitheredQuantizer& q, int copies,
                                 std::uint64_t time);

/// Reconstruction from any surviving copy: all copies share the single
/// encoding dither, so the result does not depend on which ones arrived.
double repetition_decode(const DescriptionSet& ds, const DitheredQuantizer& q);

}  // namespace stabcode
