#include "qvol/estimator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <system_error>

#include <json.hpp>

namespace qvol {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::string_view kCheckpointFormat = "qvol-checkpoint";
constexpr std::array<std::string_view, kRegionCount> kRegionNames = {"total", "sepA", "sepB", "sepEither",
                                                                     "sepBoth"};

std::string hex_double(double x) {
  if (x == 0.0 && !std::signbit(x)) return "0x0p+0";
  char buffer[64];
  const bool negative = std::signbit(x);
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, std::abs(x), std::chars_format::hex);
  if (ec != std::errc{}) throw EstimatorError("cannot encode double");
  return (negative ? "-0x" : "0x") + std::string(buffer, end);
}

double parse_hex_double(const std::string& text) {
  std::string_view s = text;
  bool negative = false;
  if (!s.empty() && s.front() == '-') {
    negative = true;
    s.remove_prefix(1);
  }
  if (s.size() < 3 || s.substr(0, 2) != "0x") throw CheckpointError("malformed hex double '" + text + "'");
  s.remove_prefix(2);
  double value = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), value, std::chars_format::hex);
  if (ec != std::errc{} || end != s.data() + s.size()) throw CheckpointError("malformed hex double '" + text + "'");
  return negative ? -value : value;
}

json encode_sum(const ExactSum& sum) {
  json parts = json::array();
  for (double p : sum.expansion()) parts.push_back(hex_double(p));
  return parts;
}

ExactSum decode_sum(const json& parts) {
  std::vector<double> values;
  for (const auto& p : parts) values.push_back(parse_hex_double(p.get<std::string>()));
  return ExactSum::from_expansion(values);
}

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

json metadata_to_json(const BankMetadata& m) {
  json manifolds = json::array();
  for (Manifold x : m.manifolds) manifolds.push_back(std::string(to_string(x)));
  json metrics = json::array();
  for (MetricKind x : m.metrics) metrics.push_back(std::string(to_string(x)));
  return json{
      {"n", m.n_dim},
      {"manifolds", manifolds},
      {"metrics", metrics},
      {"sequence",
       {{"kind", std::string(to_string(m.sequence.kind))},
        {"base", m.sequence.base},
        {"scramble_seed", m.sequence.scramble_seed},
        {"start_index", m.sequence.start_index}}},
      {"boundary_policy", {{"kind", std::string(to_string(m.policy.kind))}, {"epsilon", hex_double(m.policy.epsilon)}}},
      {"separability", m.separability},
  };
}

BankMetadata metadata_from_json(const json& j) {
  BankMetadata m;
  m.n_dim = j.at("n").get<int>();
  m.manifolds.clear();
  for (const auto& x : j.at("manifolds")) m.manifolds.push_back(parse_manifold(x.get<std::string>()));
  m.metrics.clear();
  for (const auto& x : j.at("metrics")) m.metrics.push_back(parse_metric(x.get<std::string>()));
  const json& seq = j.at("sequence");
  m.sequence.kind = parse_sequence_kind(seq.at("kind").get<std::string>());
  m.sequence.base = seq.at("base").get<std::uint32_t>();
  m.sequence.scramble_seed = seq.at("scramble_seed").get<std::uint64_t>();
  m.sequence.start_index = seq.at("start_index").get<std::uint64_t>();
  const json& policy = j.at("boundary_policy");
  m.policy.kind = parse_boundary_policy(policy.at("kind").get<std::string>());
  m.policy.epsilon = parse_hex_double(policy.at("epsilon").get<std::string>());
  m.separability = j.at("separability").get<bool>();
  return m;
}

// Report JSON: non-finite numbers become null.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }
double num(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }

std::string cell_key(MetricKind metric, Region region, Manifold manifold) {
  return std::string(to_string(metric)) + "/" + std::string(to_string(region)) + "/" +
         std::string(to_string(manifold));
}

double safe_ratio(double a, double b) { return b != 0.0 && std::isfinite(b) ? a / b : kNaN; }

}  // namespace

std::string_view to_string(Region region) { return kRegionNames[region_index(region)]; }

Region parse_region(std::string_view name) {
  for (Region r : kAllRegions)
    if (to_string(r) == name) return r;
  throw std::invalid_argument("unknown region '" + std::string(name) + "'");
}

bool region_holds(Region region, const SeparabilityFlags& flags) {
  switch (region) {
    case Region::Total: return true;
    case Region::SepA: return flags.pass_a;
    case Region::SepB: return flags.pass_b;
    case Region::SepEither: return flags.either();
    case Region::SepBoth: return flags.both();
  }
  return false;
}

BankMetadata BankMetadata::normalized() const {
  if (n_dim < 2 || n_dim > kMaxDim) throw EstimatorError("N must lie in [2, 6]");
  BankMetadata out = *this;
  std::sort(out.manifolds.begin(), out.manifolds.end());
  out.manifolds.erase(std::unique(out.manifolds.begin(), out.manifolds.end()), out.manifolds.end());
  std::sort(out.metrics.begin(), out.metrics.end());
  out.metrics.erase(std::unique(out.metrics.begin(), out.metrics.end()), out.metrics.end());
  if (out.manifolds.empty()) throw EstimatorError("bank needs at least one manifold");
  if (out.metrics.empty()) throw EstimatorError("bank needs at least one metric");
  out.sequence.dimension = 0;
  return out;
}

std::string BankMetadata::canonical_json() const { return metadata_to_json(normalized()).dump(); }

std::string BankMetadata::hash() const {
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(fnv1a(canonical_json())));
  return buffer;
}

bool operator==(const BankMetadata& a, const BankMetadata& b) { return a.canonical_json() == b.canonical_json(); }

AccumulatorBank::AccumulatorBank(BankMetadata metadata) : metadata_(metadata.normalized()) {
  for (MetricKind m : metadata_.metrics) active_.set(metric_index(m));
}

bool AccumulatorBank::has_manifold(Manifold manifold) const {
  return std::find(metadata_.manifolds.begin(), metadata_.manifolds.end(), manifold) != metadata_.manifolds.end();
}

AccumulatorBank::Part& AccumulatorBank::part(Manifold manifold) {
  if (!has_manifold(manifold)) throw EstimatorError("manifold '" + std::string(to_string(manifold)) + "' not in bank");
  return parts_[static_cast<std::size_t>(manifold)];
}

const AccumulatorBank::Part& AccumulatorBank::part(Manifold manifold) const {
  if (!has_manifold(manifold)) throw EstimatorError("manifold '" + std::string(to_string(manifold)) + "' not in bank");
  return parts_[static_cast<std::size_t>(manifold)];
}

const Cell& AccumulatorBank::cell(Manifold manifold, MetricKind metric, Region region) const {
  if (!active_.test(metric_index(metric))) throw EstimatorError("metric not in bank");
  return part(manifold).cells[metric_index(metric)][region_index(region)];
}

std::uint64_t AccumulatorBank::samples(Manifold manifold) const { return part(manifold).samples; }
const std::vector<IndexRange>& AccumulatorBank::ranges(Manifold manifold) const { return part(manifold).ranges; }
const std::vector<TracePoint>& AccumulatorBank::trace(Manifold manifold) const { return part(manifold).trace; }

bool AccumulatorBank::empty() const {
  for (Manifold m : metadata_.manifolds)
    if (part(m).samples != 0) return false;
  return true;
}

void AccumulatorBank::insert_range(std::vector<IndexRange>& ranges, IndexRange range) {
  if (range.begin >= range.end) return;
  if (ranges.empty() || ranges.back().end <= range.begin) {  // common case: appending
    if (!ranges.empty() && ranges.back().end == range.begin) {
      ranges.back().end = range.end;
    } else {
      ranges.push_back(range);
    }
    return;
  }
  auto it = std::lower_bound(ranges.begin(), ranges.end(), range,
                             [](const IndexRange& a, const IndexRange& b) { return a.end <= b.begin; });
  if (it != ranges.end() && it->begin < range.end) throw EstimatorError("overlapping index ranges");
  it = ranges.insert(it, range);
  if (it + 1 != ranges.end() && it->end == (it + 1)->begin) {
    it->end = (it + 1)->end;
    ranges.erase(it + 1);
  }
  if (it != ranges.begin() && (it - 1)->end == it->begin) {
    (it - 1)->end = it->end;
    ranges.erase(it);
  }
}

void AccumulatorBank::accumulate(const StateSample& sample, std::optional<SeparabilityFlags> flags) {
  if (!has_manifold(sample.weights.manifold)) throw EstimatorError("sample manifold not in bank");
  if (sample.rho.dim() != metadata_.n_dim) throw EstimatorError("sample dimension does not match bank");
  if (sample.weights.active != active_) throw EstimatorError("sample metric set does not match bank");
  Part& p = part(sample.weights.manifold);
  insert_range(p.ranges, {sample.cube_index, sample.cube_index + 1});
  ++p.samples;

  std::array<bool, kRegionCount> holds{true, false, false, false, false};
  if (metadata_.separability && flags) {
    for (Region r : kAllRegions) holds[region_index(r)] = region_holds(r, *flags);
  }
  for (MetricKind metric : metadata_.metrics) {
    const double w = sample.weights[metric];
    const double w2 = w * w;
    auto& row = p.cells[metric_index(metric)];
    for (std::size_t r = 0; r < kRegionCount; ++r) {
      if (!holds[r]) continue;
      ++row[r].count;
      row[r].sum_w.add(w);
      row[r].sum_w2.add(w2);
    }
  }
}

void AccumulatorBank::merge(const AccumulatorBank& other) {
  if (!(metadata_ == other.metadata_)) throw EstimatorError("cannot merge banks with different metadata");
  // Validate every range first so a failed merge leaves *this untouched.
  std::array<Part, 2> merged = parts_;
  for (Manifold m : metadata_.manifolds) {
    Part& dst = merged[static_cast<std::size_t>(m)];
    const Part& src = other.part(m);
    for (const IndexRange& r : src.ranges) insert_range(dst.ranges, r);
    dst.samples += src.samples;
    for (std::size_t k = 0; k < kMetricCount; ++k) {
      for (std::size_t r = 0; r < kRegionCount; ++r) {
        dst.cells[k][r].count += src.cells[k][r].count;
        dst.cells[k][r].sum_w.merge(src.cells[k][r].sum_w);
        dst.cells[k][r].sum_w2.merge(src.cells[k][r].sum_w2);
      }
    }
    // A trace describes one sequential prefix; it survives only a merge
    // with a trace-free bank.
    if (dst.trace.empty()) {
      dst.trace = src.trace;
    } else if (!src.trace.empty()) {
      dst.trace.clear();
    }
  }
  parts_ = std::move(merged);
}

AccumulatorBank merge(AccumulatorBank a, const AccumulatorBank& b) {
  a.merge(b);
  return a;
}

void AccumulatorBank::record_trace(Manifold manifold) {
  Part& p = part(manifold);
  if (p.samples == 0) return;
  const MetricKind lead = metadata_.metrics.front();
  const double mean = p.cells[metric_index(lead)][0].sum_w.value() / static_cast<double>(p.samples);
  p.trace.push_back({p.samples, mean});
}

void save_checkpoint(const AccumulatorBank& bank, const std::filesystem::path& path) {
  const BankMetadata& meta = bank.metadata();
  json parts = json::array();
  json cells = json::array();
  for (Manifold m : meta.manifolds) {
    json ranges = json::array();
    for (const IndexRange& r : bank.ranges(m)) ranges.push_back(json::array({r.begin, r.end}));
    json trace = json::array();
    for (const TracePoint& t : bank.trace(m)) trace.push_back(json::array({t.samples, hex_double(t.value)}));
    parts.push_back({{"manifold", std::string(to_string(m))},
                     {"samples", bank.samples(m)},
                     {"ranges", ranges},
                     {"trace", trace}});
    for (MetricKind metric : meta.metrics) {
      for (Region r : kAllRegions) {
        const Cell& c = bank.cell(m, metric, r);
        cells.push_back({{"key", cell_key(metric, r, m)},
                         {"count", c.count},
                         {"sum_w", encode_sum(c.sum_w)},
                         {"sum_w2", encode_sum(c.sum_w2)}});
      }
    }
  }
  const json doc{{"format", kCheckpointFormat},
                 {"version", kCheckpointVersion},
                 {"config_hash", meta.hash()},
                 {"metadata", metadata_to_json(meta)},
                 {"parts", parts},
                 {"cells", cells}};

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint " + tmp.string());
    out << doc.dump(1) << '\n';
    if (!out) throw CheckpointError("failed writing checkpoint " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError("cannot move checkpoint into place: " + ec.message());
}

AccumulatorBank load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot read checkpoint " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw CheckpointError("corrupt checkpoint " + path.string() + ": " + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != kCheckpointFormat) throw CheckpointError("not a qvol checkpoint");
    const int version = doc.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw CheckpointError("checkpoint version " + std::to_string(version) + " unsupported (expected " +
                            std::to_string(kCheckpointVersion) + ")");
    }
    const BankMetadata meta = metadata_from_json(doc.at("metadata"));
    if (doc.at("config_hash").get<std::string>() != meta.hash()) {
      throw CheckpointError("checkpoint config hash does not match its metadata");
    }
    AccumulatorBank bank(meta);
    for (const json& p : doc.at("parts")) {
      AccumulatorBank::Part& part = bank.part(parse_manifold(p.at("manifold").get<std::string>()));
      part.samples = p.at("samples").get<std::uint64_t>();
      for (const json& r : p.at("ranges")) {
        AccumulatorBank::insert_range(part.ranges, {r.at(0).get<std::uint64_t>(), r.at(1).get<std::uint64_t>()});
      }
      for (const json& t : p.at("trace")) {
        part.trace.push_back({t.at(0).get<std::uint64_t>(), parse_hex_double(t.at(1).get<std::string>())});
      }
    }
    std::size_t seen = 0;
    for (const json& c : doc.at("cells")) {
      const std::string key = c.at("key").get<std::string>();
      const auto s1 = key.find('/');
      const auto s2 = key.find('/', s1 + 1);
      if (s1 == std::string::npos || s2 == std::string::npos) throw CheckpointError("malformed cell key " + key);
      const MetricKind metric = parse_metric(key.substr(0, s1));
      const Region region = parse_region(key.substr(s1 + 1, s2 - s1 - 1));
      const Manifold manifold = parse_manifold(key.substr(s2 + 1));
      if (!bank.active_.test(metric_index(metric))) throw CheckpointError("cell for inactive metric " + key);
      Cell& cell = bank.part(manifold).cells[metric_index(metric)][region_index(region)];
      cell.count = c.at("count").get<std::uint64_t>();
      cell.sum_w = decode_sum(c.at("sum_w"));
      cell.sum_w2 = decode_sum(c.at("sum_w2"));
      ++seen;
    }
    if (seen != meta.normalized().manifolds.size() * meta.normalized().metrics.size() * kRegionCount) {
      throw CheckpointError("checkpoint cell array is incomplete");
    }
    return bank;
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError("corrupt checkpoint " + path.string() + ": " + e.what());
  }
}

const MetricRow* ManifoldReport::row(MetricKind metric) const {
  for (const MetricRow& r : rows)
    if (r.metric == metric) return &r;
  return nullptr;
}

const ManifoldReport* VolumeReport::manifold(Manifold m) const {
  for (const ManifoldReport& r : manifolds)
    if (r.manifold == m) return &r;
  return nullptr;
}

VolumeReport report(const AccumulatorBank& bank) {
  if (bank.empty()) throw EstimatorError("cannot report on an empty bank");
  const BankMetadata& meta = bank.metadata();
  VolumeReport out;
  out.n_dim = meta.n_dim;
  out.sequence = std::string(to_string(meta.sequence.kind));
  out.scramble_seed = meta.sequence.scramble_seed;
  out.boundary_policy = std::string(to_string(meta.policy.kind));
  out.epsilon = meta.policy.epsilon;
  out.separability = meta.separability;
  out.standard_errors = meta.sequence.kind == SequenceKind::PseudoRandom;

  const int n = meta.n_dim;
  const bool has_bures = std::find(meta.metrics.begin(), meta.metrics.end(), MetricKind::Bures) != meta.metrics.end();

  for (Manifold m : meta.manifolds) {
    const std::uint64_t samples = bank.samples(m);
    if (samples == 0) throw EstimatorError("no samples for manifold '" + std::string(to_string(m)) + "'");
    const double count = static_cast<double>(samples);
    ManifoldReport mr;
    mr.manifold = m;
    mr.dimension = manifold_dimension(n, m);
    mr.samples = samples;
    mr.flag_constant = flag_constant(n, m);
    const AnalyticVolume analytic = analytic_bures_volume({n, m == Manifold::Volume ? 0 : 1, 2});
    mr.known_bures = analytic.value;
    mr.known_bures_log = analytic.log_value;

    for (MetricKind metric : meta.metrics) {
      MetricRow row;
      row.metric = metric;
      for (Region r : kAllRegions) {
        const Cell& c = bank.cell(m, metric, r);
        RegionStat& s = row.regions[region_index(r)];
        const double mean = c.sum_w.value() / count;
        s.estimate = mr.flag_constant * mean;
        s.pass_count = c.count;
        s.standard_error = kNaN;
        if (out.standard_errors && samples > 1) {
          const double var = std::max(0.0, (c.sum_w2.value() / count - mean * mean) * count / (count - 1.0));
          s.standard_error = mr.flag_constant * std::sqrt(var / count);
        }
      }
      const double total = row.regions[0].estimate;
      for (RegionStat& s : row.regions) s.probability = safe_ratio(s.estimate, total);
      row.pooled = 0.5 * (row[Region::SepA].estimate + row[Region::SepB].estimate);
      row.pooled_probability = safe_ratio(row.pooled, total);
      row.ratio_known = total / mr.known_bures;
      mr.rows.push_back(row);
    }

    const MetricRow* bures = has_bures ? mr.row(MetricKind::Bures) : nullptr;
    for (MetricRow& row : mr.rows) {
      for (std::size_t r = 0; r < kRegionCount; ++r) {
        row.regions[r].bures_scaled = bures ? safe_ratio(row.regions[r].estimate, bures->regions[r].estimate) : kNaN;
      }
      row.pooled_bures_scaled = bures ? safe_ratio(row.pooled, bures->pooled) : kNaN;
      row.ratio_estimated = bures ? safe_ratio(row.regions[0].estimate, bures->regions[0].estimate) : kNaN;
    }

    const MetricKind lead = meta.metrics.front();
    for (Region r : kAllRegions) {
      mr.raw_pass_fraction[region_index(r)] = static_cast<double>(bank.cell(m, lead, r).count) / count;
    }

    const double final_mean = bank.cell(m, lead, Region::Total).sum_w.value() / count;
    const double trace_scale = lead == MetricKind::Bures ? mr.flag_constant / mr.known_bures : 1.0 / final_mean;
    for (const TracePoint& t : bank.trace(m)) mr.trace.push_back({t.samples, t.value * trace_scale});
    mr.last_relative_change = kNaN;
    if (mr.trace.size() >= 2) {
      const double a = mr.trace[mr.trace.size() - 2].value;
      const double b = mr.trace.back().value;
      mr.last_relative_change = std::abs(b - a) / std::abs(b);
    }

    ConjectureReport& cj = mr.conjectures;
    const MetricRow* km = mr.row(MetricKind::KuboMori);
    cj.km_bures_ratio = (km && bures) ? safe_ratio(km->regions[0].estimate, bures->regions[0].estimate) : kNaN;
    cj.km_conjectured = m == Manifold::Volume ? ConjectureConstants::km_ratio(n) : kNaN;
    cj.km_reference = (n == 6 && m == Manifold::Volume) ? kReferenceKmRatio : kNaN;
    cj.sd_factor = ConjectureConstants::sd_volume_factor(mr.dimension);
    cj.sd_bures = bures ? cj.sd_factor * bures->regions[0].estimate : kNaN;
    const bool silver = n == 4 && m == Manifold::Volume && meta.separability;
    cj.silver_sd_separable = (silver && bures) ? cj.sd_factor * bures->pooled : kNaN;
    cj.silver_sd_target = silver ? ConjectureConstants::silver_mean / 3.0 : kNaN;
    cj.silver_km_separable = (silver && km) ? cj.sd_factor * km->pooled : kNaN;
    cj.silver_km_target = silver ? 10.0 * ConjectureConstants::silver_mean : kNaN;

    if (meta.separability && bures) {
      for (const MetricRow& row : mr.rows) {
        if (row.metric != MetricKind::Bures && row.pooled_probability > bures->pooled_probability) {
          out.warnings.push_back(std::string(to_string(m)) + ": " + std::string(table_label(row.metric)) +
                                 " separability probability exceeds the Bures value");
        }
      }
    }
    out.manifolds.push_back(std::move(mr));
  }
  return out;
}

std::string report_to_json(const VolumeReport& rep) {
  json manifolds = json::array();
  for (const ManifoldReport& mr : rep.manifolds) {
    json rows = json::array();
    for (const MetricRow& row : mr.rows) {
      json regions = json::object();
      for (Region r : kAllRegions) {
        const RegionStat& s = row[r];
        regions[std::string(to_string(r))] = {{"estimate", num(s.estimate)},
                                              {"standard_error", num(s.standard_error)},
                                              {"pass_count", s.pass_count},
                                              {"probability", num(s.probability)},
                                              {"bures_scaled", num(s.bures_scaled)}};
      }
      rows.push_back({{"metric", std::string(to_string(row.metric))},
                      {"regions", regions},
                      {"pooled", num(row.pooled)},
                      {"pooled_probability", num(row.pooled_probability)},
                      {"pooled_bures_scaled", num(row.pooled_bures_scaled)},
                      {"ratio_known", num(row.ratio_known)},
                      {"ratio_estimated", num(row.ratio_estimated)}});
    }
    json trace = json::array();
    for (const TracePoint& t : mr.trace) trace.push_back(json::array({t.samples, num(t.value)}));
    json raw = json::object();
    for (Region r : kAllRegions) raw[std::string(to_string(r))] = num(mr.raw_pass_fraction[region_index(r)]);
    const ConjectureReport& cj = mr.conjectures;
    manifolds.push_back({{"manifold", std::string(to_string(mr.manifold))},
                         {"dimension", mr.dimension},
                         {"samples", mr.samples},
                         {"flag_constant", num(mr.flag_constant)},
                         {"known_bures", num(mr.known_bures)},
                         {"known_bures_log", num(mr.known_bures_log)},
                         {"rows", rows},
                         {"trace", trace},
                         {"last_relative_change", num(mr.last_relative_change)},
                         {"raw_pass_fraction", raw},
                         {"conjectures",
                          {{"km_bures_ratio", num(cj.km_bures_ratio)},
                           {"km_conjectured", num(cj.km_conjectured)},
                           {"km_reference", num(cj.km_reference)},
                           {"sd_factor", num(cj.sd_factor)},
                           {"sd_bures", num(cj.sd_bures)},
                           {"silver_sd_separable", num(cj.silver_sd_separable)},
                           {"silver_sd_target", num(cj.silver_sd_target)},
                           {"silver_km_separable", num(cj.silver_km_separable)},
                           {"silver_km_target", num(cj.silver_km_target)}}}});
  }
  const json doc{{"n", rep.n_dim},
                 {"sequence", rep.sequence},
                 {"scramble_seed", rep.scramble_seed},
                 {"boundary_policy", rep.boundary_policy},
                 {"epsilon", num(rep.epsilon)},
                 {"separability", rep.separability},
                 {"standard_errors", rep.standard_errors},
                 {"manifolds", manifolds},
                 {"warnings", rep.warnings}};
  return doc.dump(2);
}

VolumeReport report_from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    VolumeReport rep;
    rep.n_dim = doc.at("n").get<int>();
    rep.sequence = doc.at("sequence").get<std::string>();
    rep.scramble_seed = doc.at("scramble_seed").get<std::uint64_t>();
    rep.boundary_policy = doc.at("boundary_policy").get<std::string>();
    rep.epsilon = num(doc.at("epsilon"));
    rep.separability = doc.at("separability").get<bool>();
    rep.standard_errors = doc.at("standard_errors").get<bool>();
    rep.warnings = doc.at("warnings").get<std::vector<std::string>>();
    for (const json& jm : doc.at("manifolds")) {
      ManifoldReport mr;
      mr.manifold = parse_manifold(jm.at("manifold").get<std::string>());
      mr.dimension = jm.at("dimension").get<int>();
      mr.samples = jm.at("samples").get<std::uint64_t>();
      mr.flag_constant = num(jm.at("flag_constant"));
      mr.known_bures = num(jm.at("known_bures"));
      mr.known_bures_log = num(jm.at("known_bures_log"));
      for (const json& jr : jm.at("rows")) {
        MetricRow row;
        row.metric = parse_metric(jr.at("metric").get<std::string>());
        for (Region r : kAllRegions) {
          const json& js = jr.at("regions").at(std::string(to_string(r)));
          RegionStat& s = row.regions[region_index(r)];
          s.estimate = num(js.at("estimate"));
          s.standard_error = num(js.at("standard_error"));
          s.pass_count = js.at("pass_count").get<std::uint64_t>();
          s.probability = num(js.at("probability"));
          s.bures_scaled = num(js.at("bures_scaled"));
        }
        row.pooled = num(jr.at("pooled"));
        row.pooled_probability = num(jr.at("pooled_probability"));
        row.pooled_bures_scaled = num(jr.at("pooled_bures_scaled"));
        row.ratio_known = num(jr.at("ratio_known"));
        row.ratio_estimated = num(jr.at("ratio_estimated"));
        mr.rows.push_back(row);
      }
      for (const json& t : jm.at("trace")) mr.trace.push_back({t.at(0).get<std::uint64_t>(), num(t.at(1))});
      mr.last_relative_change = num(jm.at("last_relative_change"));
      for (Region r : kAllRegions) {
        mr.raw_pass_fraction[region_index(r)] = num(jm.at("raw_pass_fraction").at(std::string(to_string(r))));
      }
      const json& cj = jm.at("conjectures");
      mr.conjectures.km_bures_ratio = num(cj.at("km_bures_ratio"));
      mr.conjectures.km_conjectured = num(cj.at("km_conjectured"));
      mr.conjectures.km_reference = num(cj.at("km_reference"));
      mr.conjectures.sd_factor = num(cj.at("sd_factor"));
      mr.conjectures.sd_bures = num(cj.at("sd_bures"));
      mr.conjectures.silver_sd_separable = num(cj.at("silver_sd_separable"));
      mr.conjectures.silver_sd_target = num(cj.at("silver_sd_target"));
      mr.conjectures.silver_km_separable = num(cj.at("silver_km_separable"));
      mr.conjectures.silver_km_target = num(cj.at("silver_km_target"));
      rep.manifolds.push_back(std::move(mr));
    }
    return rep;
  } catch (const json::exception& e) {
    throw EstimatorError(std::string("malformed report JSON: ") + e.what());
  }
}

}  // namespace qvol
