#pragma once

#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace stabcode {

/// Subtractively dithered uniform scalar quantizer. The dither is uniform on
/// (-step/2, step/2], regenerated identically at encoder and decoder from
/// (dither_seed, time, description), so the reconstruction error is uniform
/// and independent of the source.
struct DitheredQuantizer {
    double step = 1.0;
    std::uint64_t dither_seed = 0;
};

/// The k quantized payloads emitted for one input sample, descriptions 1..k
/// stored by position.
struct DescriptionSet {
    std::uint64_t time_index = 0;
    std::vector<std::int64_t> payloads;

    int k() const { return static_cast<int>(payloads.size()); }
};

double dither_value(const DitheredQuantizer& q, std::uint64_t time, std::uint32_t description);

/// Pure quantization core: symbol = round((v + xi)/step).
std::int64_t quantize_with_dither(double v, double step, double xi);
double reconstruct_with_dither(std::int64_t symbol, double step, double xi);

std::int64_t dithered_encode(double v, const DitheredQuantizer& q, std::uint64_t time,
                             std::uint32_t description);
double dithered_decode(std::int64_t symbol, const DitheredQuantizer& q, std::uint64_t time,
                       std::uint32_t description);

/// k encodings of v with mutually independent dithers.
DescriptionSet independent_encodings(double v, const DitheredQuantizer& q, int k,
                                     std::uint64_t time);

/// Average of the reconstructions of the received descriptions
/// (1-based indices into ds.payloads).
double decode_average(const DescriptionSet& ds, const std::vector<int>& received,
                      const DitheredQuantizer& q);

/// Index assignment for a scalar nested-lattice multiple-description coder.
/// Central lattice: central_step * Z. Side lattice: nesting * central_step * Z.
/// Each of the `nesting` central cosets maps to a k-tuple of side points
/// (stored in units of the central step over the centered period); the map
/// extends to all of Z by the diagonal shift rule and is injective.
struct IndexAssignment {
    int nesting = 3;
    int k = 2;
    double central_step = 1.0;
    std::uint64_t dither_seed = 0;
    /// table[c + (nesting-1)/2][j] = side value (multiple of nesting) for
    /// coset c in [-(nesting-1)/2, (nesting-1)/2] and description j.
    std::vector<std::vector<int>> table;
};

/// Builds the assignment by exhaustive search over side tuples within a
/// +-2 side-cell window, minimizing the uniform-weight distortion of all
/// singleton subsets plus the full-set average, subject to global
/// injectivity (min-cost matching, lexicographic tie-break).
/// Requires odd nesting >= 3 and k >= 2.
IndexAssignment build_index_assignment(int nesting, int k, double central_step,
                                       std::uint64_t dither_seed = 0);

/// Central dithered quantization followed by the one-to-many table lookup.
/// Payload j is the side-lattice index of description j.
DescriptionSet md_encode(double v, const IndexAssignment& ia, std::uint64_t time);

/// Full reception inverts the assignment back to the central point; partial
/// reception averages the received side points. Dither-corrected. Throws on
/// an empty reception set.
double md_decode(const DescriptionSet& ds, const IndexAssignment& ia,
                 const std::vector<int>& received);

/// Second-order statistics of the per-description reconstruction errors
/// implied by an assignment table, computed coset by coset. With
/// sigma_v > 0 the cosets are weighted by the dithered Gaussian central-cell
/// probabilities, otherwise uniformly.
struct MdModelStats {
    double per_description_var = 0.0;    // in units of central_step^2
    double pairwise_covariance = 0.0;    // idem
    double pairwise_correlation = 0.0;
    std::vector<double> subset_error_var;  // mean over subsets of size ell = 1..k-1
};

MdModelStats predict_md_stats(const IndexAssignment& ia, double sigma_v = 0.0);

/// Predicted SNR ladder (ell = 1..k) of the MD coder at source std sigma_v;
/// the full set decodes to the central lattice exactly.
std::vector<double> predict_md_ladder(const IndexAssignment& ia, double sigma_v);

/// Central step such that the predicted single-description SNR for a source
/// of variance sigma_v_model^2 = |l_y p21 S|^2 + |S-1|^2 * step^2/12-coupled
/// loop hits `target_snr1`; see the loop fixed point in the simulation docs.
double calibrate_central_step(const IndexAssignment& ia, double m_norm_sq,
                              double s_minus_one_norm_sq, double target_snr1);

/// Plug-in entropy -sum p log2 p of the empirical symbol histogram.
double empirical_entropy(const std::vector<std::int64_t>& symbols);

/// var(source) / var(reconstruction - source) with unbiased sample variances;
/// +infinity when the error energy is exactly zero.
double measured_snr(const std::vector<double>& source, const std::vector<double>& reconstruction);

void to_json(nlohmann::json& j, const IndexAssignment& ia);
void from_json(const nlohmann::json& j, IndexAssignment& ia);

}  // namespace stabcode
