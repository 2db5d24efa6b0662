#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <vector>

#include "bpsim/coincidence.hpp"
#include "bpsim/grid.hpp"
#include "bpsim/rng.hpp"

namespace bpsim {

enum class Roi : std::uint8_t { A = 0, B = 1 };

inline char roi_letter(Roi r) { return r == Roi::A ? 'A' : 'B'; }

/// One detector hit: integer-nanosecond timestamp plus 2D pixel coordinates
/// inside its region of interest.
struct EventRecord {
  std::int64_t t_ns = 0;
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  Roi roi = Roi::A;
};

inline bool event_order(const EventRecord& a, const EventRecord& b) {
  if (a.t_ns != b.t_ns) return a.t_ns < b.t_ns;
  if (a.roi != b.roi) return a.roi < b.roi;
  if (a.x != b.x) return a.x < b.x;
  return a.y < b.y;
}

struct RoiBounds {
  std::uint16_t width = 0;
  std::uint16_t height = 0;
};

/// Time-sorted event list. frame_length_ns == 0 means continuous acquisition
/// (no frame boundaries).
struct EventStream {
  std::vector<EventRecord> records;
  std::int64_t frame_length_ns = 0;
  std::size_t frame_count = 1;
  RoiBounds roi_a;
  RoiBounds roi_b;

  bool is_sorted() const {
    for (std::size_t i = 1; i < records.size(); ++i)
      if (event_order(records[i], records[i - 1])) return false;
    return true;
  }
};

/// Origin of a synthesized event, kept alongside the stream (not part of the
/// on-disk format) so analyses can be validated against known provenance.
struct EventProvenance {
  std::uint64_t pair_id = 0;  // 0 for accidentals
  bool accidental = false;
};

struct SynthesizedStream {
  EventStream stream;
  std::vector<EventProvenance> provenance;  // aligned with stream.records
  std::uint64_t pairs_emitted = 0;
  std::uint64_t accidentals_emitted = 0;
};

/// Product-model synthesis parameters. The joint 2D pixel distribution of a
/// pair is joint_x(x_a, x_b) * joint_y(y_a, y_b), built from two independent
/// 1D coincidence matrices (matrix row -> ROI A, column -> ROI B).
struct StreamSynthesisParams {
  double pair_rate_hz = 0.0;
  double efficiency = 1.0;         // per arm
  double accidental_rate_hz = 0.0; // per arm, uniform over ROI and time
  double duration_s = 0.0;
  double jitter_sigma_ns = 0.0;
  std::int64_t frame_length_ns = 0;  // 0 = continuous
  int roi_offset_x = 0;              // geometric offset added to ROI B pixels
  int roi_offset_y = 0;
  std::uint64_t seed = 1;
};

namespace detail {

inline std::int64_t jittered_time(double t_ns, double sigma, CounterRng& rng) {
  const double v = sigma > 0.0 ? t_ns + sigma * rng.gaussian() : t_ns;
  return v < 0.0 ? 0 : static_cast<std::int64_t>(std::llround(v));
}

inline std::uint16_t clamp_pixel(long long v, std::uint16_t size) {
  if (v < 0) return 0;
  if (v >= static_cast<long long>(size)) return static_cast<std::uint16_t>(size - 1);
  return static_cast<std::uint16_t>(v);
}

}  // namespace detail

/// Synthesizes a time-stamped stream: pair arrivals are Poisson, each photon
/// is detected with probability `efficiency`, detected timestamps get
/// Gaussian jitter and integer-nanosecond quantization, and accidental
/// (uncorrelated) events arrive uniformly over time and ROI on each arm.
inline SynthesizedStream synthesize_stream(const CoincidenceMatrix& joint_x,
                                           const CoincidenceMatrix& joint_y,
                                           const StreamSynthesisParams& p) {
  if (p.pair_rate_hz < 0.0 || p.accidental_rate_hz < 0.0 || p.duration_s < 0.0)
    throw ConfigError("stream synthesis rates and duration must be nonnegative");
  if (p.efficiency < 0.0 || p.efficiency > 1.0)
    throw ConfigError("per-arm efficiency must lie in [0, 1]");

  const std::size_t mx = joint_x.grid.size;
  const std::size_t my = joint_y.grid.size;
  CategoricalSampler sample_x(joint_x.counts);
  CategoricalSampler sample_y(joint_y.counts);
  if (!(sample_x.total() > 0.0) || !(sample_y.total() > 0.0))
    throw ConfigError("stream synthesis needs nonempty joint distributions");

  SynthesizedStream out;
  out.stream.roi_a = {static_cast<std::uint16_t>(mx), static_cast<std::uint16_t>(my)};
  out.stream.roi_b = out.stream.roi_a;
  out.stream.frame_length_ns = p.frame_length_ns;
  const double duration_ns = p.duration_s * 1e9;
  out.stream.frame_count =
      p.frame_length_ns > 0
          ? static_cast<std::size_t>(std::ceil(duration_ns / static_cast<double>(p.frame_length_ns)))
          : 1;

  std::vector<std::pair<EventRecord, EventProvenance>> tagged;

  CounterRng time_rng(p.seed, 0x7061697274696Dull);
  CounterRng pix_rng(p.seed, 0x706169727069786ull);
  CounterRng det_rng(p.seed, 0x706169726465744ull);
  std::uint64_t pair_id = 0;
  if (p.pair_rate_hz > 0.0) {
    for (double t = time_rng.exponential(p.pair_rate_hz) * 1e9; t < duration_ns;
         t += time_rng.exponential(p.pair_rate_hz) * 1e9) {
      ++pair_id;
      const std::size_t bx = sample_x.draw(pix_rng);
      const std::size_t by = sample_y.draw(pix_rng);
      const std::uint16_t xa = static_cast<std::uint16_t>(bx / mx);
      const std::uint16_t xb_raw = static_cast<std::uint16_t>(bx % mx);
      const std::uint16_t ya = static_cast<std::uint16_t>(by / my);
      const std::uint16_t yb_raw = static_cast<std::uint16_t>(by % my);
      const bool det_a = det_rng.uniform() < p.efficiency;
      const bool det_b = det_rng.uniform() < p.efficiency;
      if (det_a) {
        EventRecord rec{detail::jittered_time(t, p.jitter_sigma_ns, det_rng), xa, ya, Roi::A};
        tagged.push_back({rec, EventProvenance{pair_id, false}});
      }
      if (det_b) {
        EventRecord rec{detail::jittered_time(t, p.jitter_sigma_ns, det_rng),
                        detail::clamp_pixel(static_cast<long long>(xb_raw) + p.roi_offset_x,
                                            static_cast<std::uint16_t>(mx)),
                        detail::clamp_pixel(static_cast<long long>(yb_raw) + p.roi_offset_y,
                                            static_cast<std::uint16_t>(my)),
                        Roi::B};
        tagged.push_back({rec, EventProvenance{pair_id, false}});
      }
    }
  }
  out.pairs_emitted = pair_id;

  CounterRng acc_rng(p.seed, 0x616363696472756Dull);
  for (int arm = 0; arm < 2; ++arm) {
    const std::uint64_t n =
        acc_rng.poisson(p.accidental_rate_hz * p.duration_s);
    for (std::uint64_t k = 0; k < n; ++k) {
      EventRecord rec;
      rec.t_ns = static_cast<std::int64_t>(acc_rng.uniform() * duration_ns);
      rec.x = static_cast<std::uint16_t>(acc_rng.uniform_index(mx));
      rec.y = static_cast<std::uint16_t>(acc_rng.uniform_index(my));
      rec.roi = arm == 0 ? Roi::A : Roi::B;
      tagged.push_back({rec, EventProvenance{0, true}});
      ++out.accidentals_emitted;
    }
  }

  std::sort(tagged.begin(), tagged.end(),
            [](const auto& a, const auto& b) { return event_order(a.first, b.first); });
  out.stream.records.reserve(tagged.size());
  out.provenance.reserve(tagged.size());
  for (auto& [rec, prov] : tagged) {
    out.stream.records.push_back(rec);
    out.provenance.push_back(prov);
  }
  return out;
}

struct CoincidencePair {
  EventRecord a;  // ROI A member
  EventRecord b;  // ROI B member
  std::int64_t dt_ns = 0;  // b.t - a.t
  std::size_t index_a = 0;  // positions in the source stream
  std::size_t index_b = 0;
};

/// Greedy earliest-first pairing: records are scanned in time order and each
/// new record pairs with the earliest unpaired record of the opposite ROI
/// within the window; every record is used at most once. Frames are pairing
/// barriers when frame_length_ns > 0 (per-frame acquisition). O(E) after the
/// sortedness check.
inline std::vector<CoincidencePair> pair_events(const EventStream& stream,
                                                std::int64_t window_ns) {
  if (window_ns < 0) throw ConfigError("coincidence window must be nonnegative");
  if (!stream.is_sorted()) throw ConfigError("pair_events requires a time-sorted stream");

  std::vector<CoincidencePair> pairs;
  std::deque<std::size_t> waiting_a, waiting_b;
  std::int64_t current_frame = -1;

  const std::vector<EventRecord>& recs = stream.records;
  for (std::size_t idx = 0; idx < recs.size(); ++idx) {
    const EventRecord& rec = recs[idx];
    if (stream.frame_length_ns > 0) {
      const std::int64_t frame = rec.t_ns / stream.frame_length_ns;
      if (frame != current_frame) {
        waiting_a.clear();
        waiting_b.clear();
        current_frame = frame;
      }
    }
    std::deque<std::size_t>& own = rec.roi == Roi::A ? waiting_a : waiting_b;
    std::deque<std::size_t>& other = rec.roi == Roi::A ? waiting_b : waiting_a;
    while (!other.empty() && rec.t_ns - recs[other.front()].t_ns > window_ns) other.pop_front();
    if (!other.empty()) {
      const std::size_t partner = other.front();
      other.pop_front();
      CoincidencePair p;
      p.index_a = rec.roi == Roi::A ? idx : partner;
      p.index_b = rec.roi == Roi::A ? partner : idx;
      p.a = recs[p.index_a];
      p.b = recs[p.index_b];
      p.dt_ns = p.b.t_ns - p.a.t_ns;
      pairs.push_back(p);
    } else {
      own.push_back(idx);
    }
  }
  return pairs;
}

/// Sparse four-dimensional correlation histogram over (x_a, y_a, x_b, y_b).
struct Corr4D {
  std::unordered_map<std::uint64_t, std::uint32_t> bins;

  static std::uint64_t key(std::uint16_t xa, std::uint16_t ya, std::uint16_t xb,
                           std::uint16_t yb) {
    return (static_cast<std::uint64_t>(xa) << 48) | (static_cast<std::uint64_t>(ya) << 32) |
           (static_cast<std::uint64_t>(xb) << 16) | static_cast<std::uint64_t>(yb);
  }
  static void unkey(std::uint64_t k, std::uint16_t& xa, std::uint16_t& ya, std::uint16_t& xb,
                    std::uint16_t& yb) {
    xa = static_cast<std::uint16_t>(k >> 48);
    ya = static_cast<std::uint16_t>(k >> 32);
    xb = static_cast<std::uint16_t>(k >> 16);
    yb = static_cast<std::uint16_t>(k);
  }

  std::uint64_t total() const {
    std::uint64_t acc = 0;
    for (const auto& [k, v] : bins) acc += v;
    return acc;
  }
};

inline Corr4D accumulate_corr4d(const std::vector<CoincidencePair>& pairs) {
  Corr4D c;
  c.bins.reserve(pairs.size());
  for (const CoincidencePair& p : pairs)
    ++c.bins[Corr4D::key(p.a.x, p.a.y, p.b.x, p.b.y)];
  return c;
}

/// Histogram of pair offsets (x_b - x_a, y_b - y_a); its peak is the
/// geometric registration offset between the two ROIs.
struct OffsetPeak {
  int dx = 0;
  int dy = 0;
  std::uint64_t count = 0;
};

inline OffsetPeak correlation_offset_peak(const Corr4D& c) {
  std::unordered_map<std::uint64_t, std::uint64_t> hist;
  for (const auto& [k, v] : c.bins) {
    std::uint16_t xa, ya, xb, yb;
    Corr4D::unkey(k, xa, ya, xb, yb);
    const std::uint64_t hkey =
        (static_cast<std::uint64_t>(static_cast<std::uint32_t>(static_cast<int>(xb) - xa))
         << 32) |
        static_cast<std::uint32_t>(static_cast<int>(yb) - ya);
    hist[hkey] += v;
  }
  OffsetPeak best;
  for (const auto& [k, v] : hist) {
    if (v > best.count) {
      best.count = v;
      best.dx = static_cast<std::int32_t>(static_cast<std::uint32_t>(k >> 32));
      best.dy = static_cast<std::int32_t>(static_cast<std::uint32_t>(k & 0xFFFFFFFFull));
    }
  }
  return best;
}

/// Post-selected image at offset xi: entries with (x_b, y_b) = (x_a, y_a) + xi,
/// indexed by the ROI B coordinates.
inline Image2D postselect_2d(const Corr4D& c, int xi_x, int xi_y, std::size_t width,
                             std::size_t height) {
  Image2D img = make_image(width, height);
  for (const auto& [k, v] : c.bins) {
    std::uint16_t xa, ya, xb, yb;
    Corr4D::unkey(k, xa, ya, xb, yb);
    if (static_cast<int>(xb) - static_cast<int>(xa) != xi_x) continue;
    if (static_cast<int>(yb) - static_cast<int>(ya) != xi_y) continue;
    if (xb < width && yb < height) img.at(xb, yb) += static_cast<double>(v);
  }
  return img;
}

/// Sum of the n x n grid of post-selected images around the registration
/// offset (dx0, dy0). Images are indexed by the ROI B coordinates, which keeps
/// the correlated features aligned across windows, so the per-window shift is
/// the identity and totals are conserved per window.
inline Image2D postselect_sum_2d(const Corr4D& c, std::size_t n, int dx0, int dy0,
                                 std::size_t width, std::size_t height) {
  if (n < 1) throw ConfigError("postselect_sum_2d needs n >= 1");
  Image2D img = make_image(width, height);
  const std::vector<long long> offs = window_offsets(n);
  for (const auto& [k, v] : c.bins) {
    std::uint16_t xa, ya, xb, yb;
    Corr4D::unkey(k, xa, ya, xb, yb);
    const long long rx = static_cast<long long>(xb) - xa - dx0;
    const long long ry = static_cast<long long>(yb) - ya - dy0;
    if (rx < offs.front() || rx > offs.back() || ry < offs.front() || ry > offs.back()) continue;
    if (xb < width && yb < height) img.at(xb, yb) += static_cast<double>(v);
  }
  return img;
}

/// 2D singles image of one ROI (every event, paired or not).
inline Image2D singles_image(const EventStream& stream, Roi roi, std::size_t width,
                             std::size_t height) {
  Image2D img = make_image(width, height);
  for (const EventRecord& r : stream.records)
    if (r.roi == roi && r.x < width && r.y < height) img.at(r.x, r.y) += 1.0;
  return img;
}

/// 2D coincidence image of the ROI B members of the given pairs.
inline Image2D coincidence_image(const std::vector<CoincidencePair>& pairs, std::size_t width,
                                 std::size_t height) {
  Image2D img = make_image(width, height);
  for (const CoincidencePair& p : pairs)
    if (p.b.x < width && p.b.y < height) img.at(p.b.x, p.b.y) += 1.0;
  return img;
}

/// All-pairs count of A-B time differences falling in [offset - window,
/// offset + window]. With an offset far beyond the correlation time this is
/// the standard delayed-window accidental-rate estimate.
inline std::uint64_t count_coincidences_delayed(const EventStream& stream, std::int64_t offset_ns,
                                                std::int64_t window_ns) {
  std::vector<std::int64_t> ta, tb;
  for (const EventRecord& r : stream.records)
    (r.roi == Roi::A ? ta : tb).push_back(r.t_ns);
  std::uint64_t count = 0;
  std::size_t lo = 0, hi = 0;
  for (const std::int64_t t : ta) {
    const std::int64_t from = t + offset_ns - window_ns;
    const std::int64_t to = t + offset_ns + window_ns;
    while (lo < tb.size() && tb[lo] < from) ++lo;
    if (hi < lo) hi = lo;
    while (hi < tb.size() && tb[hi] <= to) ++hi;
    count += hi - lo;
  }
  return count;
}

}  // namespace bpsim
