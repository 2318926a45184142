#include "stabcode/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "stabcode/det_random.hpp"

namespace stabcode {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sample_variance(const std::vector<double>& x) {
    if (x.size() < 2) throw std::invalid_argument("need at least two samples");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double acc = 0.0;
    for (double v : x) acc += (v - mean) * (v - mean);
    return acc / static_cast<double>(x.size() - 1);
}

double phi_pdf(double t) { return std::exp(-0.5 * t * t) * 0.3989422804014326779399461; }
double phi_cdf(double t) { return 0.5 * std::erfc(-t * 0.7071067811865475244008444); }

// Antiderivative of Phi(x/sigma): x Phi(x/sigma) + sigma phi(x/sigma).
double phi_int(double x, double sigma) {
    return x * phi_cdf(x / sigma) + sigma * phi_pdf(x / sigma);
}

// P(symbol == m) for the dithered quantizer on a zero-mean Gaussian source.
double symbol_prob(long long m, double step, double sigma) {
    const double a = (static_cast<double>(m) - 0.5) * step;
    const double b = (static_cast<double>(m) + 0.5) * step;
    const double h = 0.5 * step;
    return (phi_int(b + h, sigma) - phi_int(a + h, sigma) - phi_int(b - h, sigma) +
            phi_int(a - h, sigma)) /
           step;
}

// Assignment problem (rows = cosets, cols = candidate classes) by the
// standard shortest-augmenting-path algorithm; deterministic for a fixed
// column order.
std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const int m = static_cast<int>(cost[0].size());
    if (m < n) throw std::invalid_argument("assignment needs at least as many columns as rows");
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0), v(static_cast<std::size_t>(m) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(m) + 1, 0), way(static_cast<std::size_t>(m) + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(m) + 1, kInf);
        std::vector<bool> used(static_cast<std::size_t>(m) + 1, false);
        do {
            used[static_cast<std::size_t>(j0)] = true;
            const int i0 = p[static_cast<std::size_t>(j0)];
            double delta = kInf;
            int j1 = 0;
            for (int j = 1; j <= m; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                                   u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= m; ++j)
        if (p[static_cast<std::size_t>(j)] > 0) row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
    return row_to_col;
}

}  // namespace

double dither_value(const DitheredQuantizer& q, std::uint64_t time, std::uint32_t description) {
    const double u = detrng::uniform01(q.dither_seed, time, description);
    return q.step * (u - 0.5);
}

std::int64_t quantize_with_dither(double v, double step, double xi) {
    if (!std::isfinite(v)) throw std::invalid_argument("cannot quantize a non-finite value");
    if (step <= 0.0) throw std::invalid_argument("quantizer step must be positive");
    return static_cast<std::int64_t>(std::floor((v + xi) / step + 0.5));
}

double reconstruct_with_dither(std::int64_t symbol, double step, double xi) {
    return static_cast<double>(symbol) * step - xi;
}

std::int64_t dithered_encode(double v, const DitheredQuantizer& q, std::uint64_t time,
                             std::uint32_t description) {
    return quantize_with_dither(v, q.step, dither_value(q, time, description));
}

double dithered_decode(std::int64_t symbol, const DitheredQuantizer& q, std::uint64_t time,
                       std::uint32_t description) {
    return reconstruct_with_dither(symbol, q.step, dither_value(q, time, description));
}

DescriptionSet independent_encodings(double v, const DitheredQuantizer& q, int k,
                                     std::uint64_t time) {
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    DescriptionSet ds;
    ds.time_index = time;
    ds.payloads.resize(static_cast<std::size_t>(k));
    for (int j = 1; j <= k; ++j)
        ds.payloads[static_cast<std::size_t>(j - 1)] =
            dithered_encode(v, q, time, static_cast<std::uint32_t>(j));
    return ds;
}

double decode_average(const DescriptionSet& ds, const std::vector<int>& received,
                      const DitheredQuantizer& q) {
    if (received.empty()) throw std::invalid_argument("empty reception set");
    double acc = 0.0;
    for (int j : received) {
        if (j < 1 || j > ds.k()) throw std::invalid_argument("description index out of range");
        acc += dithered_decode(ds.payloads[static_cast<std::size_t>(j - 1)], q, ds.time_index,
                               static_cast<std::uint32_t>(j));
    }
    return acc / static_cast<double>(received.size());
}

IndexAssignment build_index_assignment(int nesting, int k, double central_step,
                                       std::uint64_t dither_seed) {
    if (nesting % 2 == 0) throw std::invalid_argument("even nesting factors unsupported (asymmetric cells)");
    if (nesting < 3 || nesting > 25) throw std::invalid_argument("nesting factor must be odd in [3, 25]");
    if (k < 2 || k > 4) throw std::invalid_argument("k must be in [2, 4] for the table search");
    if (central_step <= 0.0) throw std::invalid_argument("central step must be positive");

    const int half = (nesting - 1) / 2;

    // Candidate tuples within +-2 side cells, grouped into diagonal-shift
    // classes; two cosets may not share a class or the global map loses
    // injectivity.
    std::vector<int> offsets;
    for (int c = -2; c <= 2; ++c) offsets.push_back(c * nesting);
    std::vector<std::vector<int>> tuples;
    {
        std::vector<int> cur(static_cast<std::size_t>(k), 0);
        std::size_t total = 1;
        for (int j = 0; j < k; ++j) total *= offsets.size();
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t rem = idx;
            for (int j = 0; j < k; ++j) {
                cur[static_cast<std::size_t>(j)] = offsets[rem % offsets.size()];
                rem /= offsets.size();
            }
            tuples.push_back(cur);
        }
        std::sort(tuples.begin(), tuples.end());
    }

    auto class_key = [&](const std::vector<int>& t) {
        std::vector<int> key(static_cast<std::size_t>(k - 1));
        for (int j = 1; j < k; ++j) key[static_cast<std::size_t>(j - 1)] = t[static_cast<std::size_t>(j)] - t[0];
        return key;
    };
    std::vector<std::vector<int>> class_keys;
    std::unordered_map<std::string, int> class_index;
    auto key_str = [](const std::vector<int>& key) {
        std::string s;
        for (int v : key) s += std::to_string(v) + ",";
        return s;
    };
    for (const auto& t : tuples) {
        const auto key = class_key(t);
        const auto ks = key_str(key);
        if (class_index.emplace(ks, static_cast<int>(class_keys.size())).second)
            class_keys.push_back(key);
    }

    auto tuple_cost = [&](int coset, const std::vector<int>& t) {
        double cost = 0.0;
        double mean = 0.0;
        for (int j = 0; j < k; ++j) {
            const double d = t[static_cast<std::size_t>(j)] - coset;
            cost += d * d;
            mean += t[static_cast<std::size_t>(j)];
        }
        mean /= k;
        const double dm = mean - coset;
        return (cost + dm * dm) / (k + 1);
    };

    const int n_classes = static_cast<int>(class_keys.size());
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(nesting),
                                          std::vector<double>(static_cast<std::size_t>(n_classes), kInf));
    std::vector<std::vector<std::vector<int>>> best_tuple(
        static_cast<std::size_t>(nesting),
        std::vector<std::vector<int>>(static_cast<std::size_t>(n_classes)));
    for (int c = -half; c <= half; ++c) {
        const std::size_t row = static_cast<std::size_t>(c + half);
        for (const auto& t : tuples) {
            const int cls = class_index.at(key_str(class_key(t)));
            const double cst = tuple_cost(c, t);
            // tuples are pre-sorted, so the first minimum is the
            // lexicographically smallest among ties
            if (cst < cost[row][static_cast<std::size_t>(cls)] - 1e-12) {
                cost[row][static_cast<std::size_t>(cls)] = cst;
                best_tuple[row][static_cast<std::size_t>(cls)] = t;
            }
        }
    }

    const std::vector<int> row_to_col = min_cost_assignment(cost);

    IndexAssignment ia;
    ia.nesting = nesting;
    ia.k = k;
    ia.central_step = central_step;
    ia.dither_seed = dither_seed;
    ia.table.resize(static_cast<std::size_t>(nesting));
    for (int c = -half; c <= half; ++c) {
        const std::size_t row = static_cast<std::size_t>(c + half);
        ia.table[row] = best_tuple[row][static_cast<std::size_t>(row_to_col[row])];
    }
    return ia;
}

DescriptionSet md_encode(double v, const IndexAssignment& ia, std::uint64_t time) {
    const DitheredQuantizer central{ia.central_step, ia.dither_seed};
    const std::int64_t m = dithered_encode(v, central, time, 0);
    const int half = (ia.nesting - 1) / 2;
    // centered residue; nesting is odd so llround never ties
    const std::int64_t q = std::llround(static_cast<double>(m) / ia.nesting);
    const int r = static_cast<int>(m - q * ia.nesting);
    const auto& tuple = ia.table[static_cast<std::size_t>(r + half)];
    DescriptionSet ds;
    ds.time_index = time;
    ds.payloads.resize(static_cast<std::size_t>(ia.k));
    for (int j = 0; j < ia.k; ++j)
        ds.payloads[static_cast<std::size_t>(j)] =
            q + tuple[static_cast<std::size_t>(j)] / ia.nesting;
    return ds;
}

double md_decode(const DescriptionSet& ds, const IndexAssignment& ia,
                 const std::vector<int>& received) {
    if (received.empty()) throw std::invalid_argument("empty reception set");
    const DitheredQuantizer central{ia.central_step, ia.dither_seed};
    const double xi = dither_value(central, ds.time_index, 0);
    const int half = (ia.nesting - 1) / 2;
    if (static_cast<int>(received.size()) == ia.k) {
        // invert the one-to-many map back to the central symbol
        for (int r = -half; r <= half; ++r) {
            const auto& tuple = ia.table[static_cast<std::size_t>(r + half)];
            const std::int64_t s0 = ds.payloads[0] * ia.nesting;
            const std::int64_t base = s0 - tuple[0];
            bool match = true;
            for (int j = 1; j < ia.k; ++j) {
                if (ds.payloads[static_cast<std::size_t>(j)] * ia.nesting -
                        tuple[static_cast<std::size_t>(j)] !=
                    base) {
                    match = false;
                    break;
                }
            }
            if (match && base % ia.nesting == 0) {
                const std::int64_t m = base + r;
                return static_cast<double>(m) * ia.central_step - xi;
            }
        }
        throw std::invalid_argument("payload tuple not in the assignment image");
    }
    double acc = 0.0;
    for (int j : received) {
        if (j < 1 || j > ia.k) throw std::invalid_argument("description index out of range");
        acc += static_cast<double>(ds.payloads[static_cast<std::size_t>(j - 1)] * ia.nesting);
    }
    return acc / static_cast<double>(received.size()) * ia.central_step - xi;
}

MdModelStats predict_md_stats(const IndexAssignment& ia, double sigma_v) {
    const int half = (ia.nesting - 1) / 2;
    const int k = ia.k;
    std::vector<double> weight(static_cast<std::size_t>(ia.nesting), 1.0 / ia.nesting);
    if (sigma_v > 0.0) {
        std::fill(weight.begin(), weight.end(), 0.0);
        const long long window =
            std::llround(8.0 * sigma_v / ia.central_step) + 2ll * ia.nesting;
        double total = 0.0;
        for (long long m = -window; m <= window; ++m) {
            const double p = symbol_prob(m, ia.central_step, sigma_v);
            const std::int64_t q = std::llround(static_cast<double>(m) / ia.nesting);
            const int r = static_cast<int>(m - q * ia.nesting);
            weight[static_cast<std::size_t>(r + half)] += p;
            total += p;
        }
        for (double& w : weight) w /= total;
    }

    // first and second moments of the side offsets D_j = s_j - c per coset
    std::vector<double> mu(static_cast<std::size_t>(k), 0.0);
    std::vector<std::vector<double>> second(static_cast<std::size_t>(k),
                                            std::vector<double>(static_cast<std::size_t>(k), 0.0));
    for (int c = -half; c <= half; ++c) {
        const auto& tuple = ia.table[static_cast<std::size_t>(c + half)];
        const double w = weight[static_cast<std::size_t>(c + half)];
        for (int i = 0; i < k; ++i) {
            const double di = tuple[static_cast<std::size_t>(i)] - c;
            mu[static_cast<std::size_t>(i)] += w * di;
            for (int j = 0; j < k; ++j) {
                const double dj = tuple[static_cast<std::size_t>(j)] - c;
                second[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] += w * di * dj;
            }
        }
    }

    MdModelStats stats;
    double var_acc = 0.0, cov_acc = 0.0, corr_acc = 0.0;
    int pairs = 0;
    std::vector<double> var(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        var[static_cast<std::size_t>(i)] = second[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] -
                                           mu[static_cast<std::size_t>(i)] * mu[static_cast<std::size_t>(i)] +
                                           1.0 / 12.0;
        var_acc += var[static_cast<std::size_t>(i)];
    }
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            const double cov = second[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                               mu[static_cast<std::size_t>(i)] * mu[static_cast<std::size_t>(j)] + 1.0 / 12.0;
            cov_acc += cov;
            corr_acc += cov / std::sqrt(var[static_cast<std::size_t>(i)] * var[static_cast<std::size_t>(j)]);
            ++pairs;
        }
    stats.per_description_var = var_acc / k;
    stats.pairwise_covariance = pairs ? cov_acc / pairs : 0.0;
    stats.pairwise_correlation = pairs ? corr_acc / pairs : 0.0;

    // mean error variance of the subset-average decoder for each ell < k
    stats.subset_error_var.assign(static_cast<std::size_t>(k), 0.0);
    for (int ell = 1; ell < k; ++ell) {
        double acc = 0.0;
        int count = 0;
        // enumerate size-ell subsets of {0..k-1} by bitmask
        for (int mask = 1; mask < (1 << k); ++mask) {
            if (__builtin_popcount(static_cast<unsigned>(mask)) != ell) continue;
            double e2 = 0.0, e1 = 0.0;
            for (int c = -half; c <= half; ++c) {
                const auto& tuple = ia.table[static_cast<std::size_t>(c + half)];
                const double w = weight[static_cast<std::size_t>(c + half)];
                double avg = 0.0;
                for (int j = 0; j < k; ++j)
                    if (mask & (1 << j)) avg += tuple[static_cast<std::size_t>(j)] - c;
                avg /= ell;
                e2 += w * avg * avg;
                e1 += w * avg;
            }
            acc += e2 - e1 * e1 + 1.0 / 12.0;
            ++count;
        }
        stats.subset_error_var[static_cast<std::size_t>(ell - 1)] = acc / count;
    }
    stats.subset_error_var[static_cast<std::size_t>(k - 1)] = 1.0 / 12.0;  // exact inversion
    return stats;
}

std::vector<double> predict_md_ladder(const IndexAssignment& ia, double sigma_v) {
    const MdModelStats stats = predict_md_stats(ia, sigma_v);
    std::vector<double> ladder(static_cast<std::size_t>(ia.k));
    const double step2 = ia.central_step * ia.central_step;
    for (int ell = 1; ell <= ia.k; ++ell)
        ladder[static_cast<std::size_t>(ell - 1)] =
            sigma_v * sigma_v / (stats.subset_error_var[static_cast<std::size_t>(ell - 1)] * step2);
    return ladder;
}

double calibrate_central_step(const IndexAssignment& ia, double m_norm_sq,
                              double s_minus_one_norm_sq, double target_snr1) {
    if (target_snr1 <= 0.0) throw std::invalid_argument("target SNR must be positive");
    // At zero loss the loop runs on the exact central reconstruction,
    // sigma_v^2 = m_norm_sq + s1 * step^2/12, while a single description sees
    // var1(step) = (offset second moment + 1/12) step^2.
    double var1_unit = predict_md_stats(ia).per_description_var;
    double step_sq = m_norm_sq / (target_snr1 * var1_unit - s_minus_one_norm_sq / 12.0);
    if (step_sq <= 0.0) throw std::domain_error("target single-description SNR unattainable");
    for (int i = 0; i < 8; ++i) {
        const double sigma_v =
            std::sqrt(m_norm_sq + s_minus_one_norm_sq * step_sq / 12.0);
        var1_unit = predict_md_stats(ia, sigma_v).per_description_var;
        const double next = m_norm_sq / (target_snr1 * var1_unit - s_minus_one_norm_sq / 12.0);
        if (next <= 0.0) throw std::domain_error("target single-description SNR unattainable");
        if (std::abs(next - step_sq) <= 1e-12 * step_sq) {
            step_sq = next;
            break;
        }
        step_sq = next;
    }
    return std::sqrt(step_sq);
}

double empirical_entropy(const std::vector<std::int64_t>& symbols) {
    if (symbols.empty()) throw std::invalid_argument("empty symbol sequence");
    std::unordered_map<std::int64_t, std::size_t> hist;
    for (std::int64_t s : symbols) ++hist[s];
    const double n = static_cast<double>(symbols.size());
    double h = 0.0;
    for (const auto& [sym, count] : hist) {
        (void)sym;
        const double p = static_cast<double>(count) / n;
        h -= p * std::log2(p);
    }
    return h;
}

double measured_snr(const std::vector<double>& source, const std::vector<double>& reconstruction) {
    if (source.size() != reconstruction.size())
        throw std::invalid_argument("source and reconstruction lengths differ");
    std::vector<double> err(source.size());
    for (std::size_t i = 0; i < source.size(); ++i) err[i] = reconstruction[i] - source[i];
    const double ve = sample_variance(err);
    if (ve == 0.0) return kInf;
    return sample_variance(source) / ve;
}

void to_json(nlohmann::json& j, const IndexAssignment& ia) {
    j = nlohmann::json{{"nesting", ia.nesting},
                       {"k", ia.k},
                       {"central_step", ia.central_step},
                       {"dither_seed", ia.dither_seed},
                       {"table", ia.table}};
}

void from_json(const nlohmann::json& j, IndexAssignment& ia) {
    j.at("nesting").get_to(ia.nesting);
    j.at("k").get_to(ia.k);
    j.at("central_step").get_to(ia.central_step);
    ia.dither_seed = j.value("dither_seed", 0ull);
    j.at("table").get_to(ia.table);
}

}  // namespace stabcode
