#include "stabcode/channel.hpp"

#include <stdexcept>

#include "stabcode/det_random.hpp"

namespace stabcode {

ReceptionRecord transmit(const DescriptionSet& ds, const ErasureChannel& ch) {
    if (ch.loss_probability < 0.0 || ch.loss_probability > 1.0)
        throw std::invalid_argument("loss probability must be in [0,1]");
    ReceptionRecord rec;
    rec.time_index = ds.time_index;
    rec.received.reserve(ds.payloads.size());
    for (int j = 1; j <= ds.k(); ++j) {
        const double u = detrng::uniform01(ch.rng_seed, ds.time_index, static_cast<std::uint64_t>(j));
        if (u > ch.loss_probability) rec.received.push_back(j);
    }
    return rec;
}

DescriptionSet repetition_encode(double v, const DitheredQuantizer& q, int copies,
                                 std::uint64_t time) {
    if (copies < 1) throw std::invalid_argument("copies must be >= 1");
    DescriptionSet ds;
    ds.time_index = time;
    const std::int64_t symbol = dithered_encode(v, q, time, 1);
    ds.payloads.assign(static_cast<std::size_t>(copies), symbol);
    return ds;
}

double repetition_decode(const DescriptionSet& ds, const DitheredQuantizer& q) {
    if (ds.payloads.empty()) throw std::invalid_argument("empty description set");
    return dithered_decode(ds.payloads.front(), q, ds.time_index, 1);
}

}  // namespace stabcode
