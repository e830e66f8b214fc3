#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "qvol/estimator.hpp"

using namespace qvol;

namespace {

BankMetadata metadata_for(int n, SequenceKind kind = SequenceKind::GeneralizedFaure,
                          std::vector<Manifold> manifolds = {Manifold::Volume}) {
  BankMetadata m;
  m.n_dim = n;
  m.manifolds = std::move(manifolds);
  m.sequence.kind = kind;
  m.sequence.scramble_seed = kind == SequenceKind::PseudoRandom ? 99 : 0;
  m.separability = splits_for_dimension(n).has_value();
  return m;
}

// Draws stream positions [first, first + count) into `bank`.
void fill(AccumulatorBank& bank, Manifold manifold, std::uint64_t first, std::uint64_t count) {
  const BankMetadata& meta = bank.metadata();
  const StateSampler sampler(meta.n_dim, manifold, meta.metrics, meta.policy);
  SequenceSpec spec = meta.sequence;
  spec.dimension = sampler.cube_dimension();
  PointStream stream(spec);
  stream.skip_to(first);
  std::optional<SeparabilityClassifier> classifier;
  if (meta.separability) classifier = SeparabilityClassifier::for_dimension(meta.n_dim);
  std::vector<double> u(static_cast<std::size_t>(spec.dimension));
  StateSample s;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t index = stream.next_point(u);
    sampler.sample(u, index, s);
    std::optional<SeparabilityFlags> flags;
    if (classifier) flags = classifier->classify(s.rho);
    bank.accumulate(s, flags);
  }
}

StateSample one_sample(int n, std::uint64_t index) {
  const StateSampler sampler(n, Manifold::Volume, {kAllMetrics.begin(), kAllMetrics.end()});
  PointStream stream({SequenceKind::PseudoRandom, sampler.cube_dimension(), 0, 5});
  stream.skip_to(index);
  CubePoint p = stream.next_point();
  return sampler.sample(p);
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("qvol_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& p, const std::string& text) { std::ofstream(p, std::ios::trunc) << text; }

}  // namespace

TEST_CASE("exact sum is order independent and exact") {
  ExactSum s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1.0);

  std::mt19937_64 rng(3);
  std::lognormal_distribution<double> dist(0.0, 30.0);
  std::vector<double> xs(20000);
  for (double& x : xs) x = dist(rng) * (rng() % 3 == 0 ? -1.0 : 1.0);
  ExactSum forward, backward;
  for (double x : xs) forward.add(x);
  std::shuffle(xs.begin(), xs.end(), rng);
  for (double x : xs) backward.add(x);
  CHECK(forward == backward);
  CHECK(forward.value() == backward.value());

  ExactSum half_a, half_b;
  for (std::size_t i = 0; i < xs.size(); ++i) (i % 2 ? half_a : half_b).add(xs[i]);
  CHECK(half_a + half_b == forward);
  CHECK(forward - half_a == half_b);

  const ExactSum rebuilt = ExactSum::from_expansion(forward.expansion());
  CHECK(rebuilt == forward);
  CHECK(ExactSum{}.expansion().empty());
  CHECK(ExactSum{}.value() == 0.0);

  ExactSum extremes;
  extremes.add(0x1p-1074);
  extremes.add(0x1.fffffffffffffp+1023);
  CHECK(extremes.expansion().size() == 2);
  CHECK(ExactSum::from_expansion(extremes.expansion()) == extremes);
  CHECK_THROWS_AS(extremes.add(std::nan("")), std::domain_error);
}

TEST_CASE("exact sum value is within one ulp of the long double sum") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  ExactSum s;
  long double ref = 0.0L;
  for (int i = 0; i < 100000; ++i) {
    const double x = dist(rng);
    s.add(x);
    ref += x;
  }
  CHECK(std::abs(s.value() - static_cast<double>(ref)) <= 2.0 * std::nextafter(s.value(), 1e300) - 2.0 * s.value());
}

TEST_CASE("region gating") {
  CHECK(region_holds(Region::Total, {}));
  CHECK_FALSE(region_holds(Region::SepA, {}));
  CHECK(region_holds(Region::SepEither, {false, true}));
  CHECK_FALSE(region_holds(Region::SepBoth, {false, true}));
  CHECK(region_holds(Region::SepBoth, {true, true}));
  for (Region r : kAllRegions) CHECK(parse_region(to_string(r)) == r);
  CHECK_THROWS(parse_region("sepC"));
}

TEST_CASE("single sample with all flags false fills only total cells") {
  AccumulatorBank bank(metadata_for(6));
  const StateSample s = one_sample(6, 0);
  bank.accumulate(s, SeparabilityFlags{false, false});
  for (MetricKind m : kAllMetrics) {
    for (Region r : kAllRegions) {
      const Cell& c = bank.cell(Manifold::Volume, m, r);
      if (r == Region::Total) {
        CHECK(c.count == 1);
        CHECK(c.sum_w.value() == s.weights[m]);
        CHECK(c.sum_w2.value() == s.weights[m] * s.weights[m]);
      } else {
        CHECK(c.count == 0);
        CHECK(c.sum_w.is_zero());
      }
    }
  }
  CHECK(bank.samples(Manifold::Volume) == 1);
  REQUIRE(bank.ranges(Manifold::Volume).size() == 1);
  CHECK(bank.ranges(Manifold::Volume)[0] == IndexRange{s.cube_index, s.cube_index + 1});
}

TEST_CASE("both flags set fill all five regions") {
  AccumulatorBank bank(metadata_for(6));
  const StateSample s = one_sample(6, 3);
  bank.accumulate(s, SeparabilityFlags{true, true});
  for (MetricKind m : kAllMetrics)
    for (Region r : kAllRegions) CHECK(bank.cell(Manifold::Volume, m, r).count == 1);

  AccumulatorBank only_a(metadata_for(6));
  only_a.accumulate(s, SeparabilityFlags{true, false});
  CHECK(only_a.cell(Manifold::Volume, MetricKind::Bures, Region::SepA).count == 1);
  CHECK(only_a.cell(Manifold::Volume, MetricKind::Bures, Region::SepEither).count == 1);
  CHECK(only_a.cell(Manifold::Volume, MetricKind::Bures, Region::SepB).count == 0);
  CHECK(only_a.cell(Manifold::Volume, MetricKind::Bures, Region::SepBoth).count == 0);
}

TEST_CASE("accumulate rejects mismatched samples") {
  AccumulatorBank bank(metadata_for(6));
  const StateSample s = one_sample(6, 0);
  bank.accumulate(s, SeparabilityFlags{});
  CHECK_THROWS_AS(bank.accumulate(s, SeparabilityFlags{}), EstimatorError);  // repeated index

  StateSample wrong_manifold = one_sample(6, 1);
  wrong_manifold.weights.manifold = Manifold::Hyperarea;
  CHECK_THROWS_AS(bank.accumulate(wrong_manifold, SeparabilityFlags{}), EstimatorError);

  StateSample wrong_metrics = one_sample(6, 2);
  wrong_metrics.weights.active.reset(metric_index(MetricKind::Gks));
  CHECK_THROWS_AS(bank.accumulate(wrong_metrics, SeparabilityFlags{}), EstimatorError);

  CHECK_THROWS_AS(bank.accumulate(one_sample(3, 4), std::nullopt), EstimatorError);
  CHECK_THROWS_AS(bank.cell(Manifold::Hyperarea, MetricKind::Bures, Region::Total), EstimatorError);
  CHECK_THROWS_AS(AccumulatorBank(metadata_for(7)), EstimatorError);
}

TEST_CASE("inclusion-exclusion holds exactly over 1e5 qubit-qutrit samples") {
  BankMetadata meta = metadata_for(6, SequenceKind::PseudoRandom);
  AccumulatorBank bank(meta);
  fill(bank, Manifold::Volume, 0, 100000);
  CHECK(bank.cell(Manifold::Volume, MetricKind::Bures, Region::SepBoth).count > 0);
  for (MetricKind m : kAllMetrics) {
    auto c = [&](Region r) -> const Cell& { return bank.cell(Manifold::Volume, m, r); };
    CHECK(c(Region::SepEither).sum_w == c(Region::SepA).sum_w + c(Region::SepB).sum_w - c(Region::SepBoth).sum_w);
    CHECK(c(Region::SepEither).sum_w2 == c(Region::SepA).sum_w2 + c(Region::SepB).sum_w2 - c(Region::SepBoth).sum_w2);
    CHECK(c(Region::SepEither).count + c(Region::SepBoth).count == c(Region::SepA).count + c(Region::SepB).count);

    // Monotonicity of the region sums.
    const double total = c(Region::Total).sum_w.value();
    const double a = c(Region::SepA).sum_w.value();
    const double b = c(Region::SepB).sum_w.value();
    const double either = c(Region::SepEither).sum_w.value();
    const double both = c(Region::SepBoth).sum_w.value();
    CHECK(both <= std::min(a, b));
    CHECK(std::max(a, b) <= either);
    CHECK(either <= total);
  }
}

TEST_CASE("merge identity, commutativity and error cases") {
  AccumulatorBank a(metadata_for(4));
  AccumulatorBank b(metadata_for(4));
  fill(a, Manifold::Volume, 0, 3000);
  fill(b, Manifold::Volume, 3000, 2000);
  const AccumulatorBank empty(metadata_for(4));

  CHECK(merge(a, empty) == a);
  CHECK(merge(empty, a) == a);
  const AccumulatorBank ab = merge(a, b);
  const AccumulatorBank ba = merge(b, a);
  CHECK(ab == ba);
  CHECK(ab.samples(Manifold::Volume) == 5000);
  REQUIRE(ab.ranges(Manifold::Volume).size() == 1);
  CHECK(ab.ranges(Manifold::Volume)[0].end - ab.ranges(Manifold::Volume)[0].begin == 5000);

  AccumulatorBank overlap(metadata_for(4));
  fill(overlap, Manifold::Volume, 2500, 1000);
  AccumulatorBank copy = a;
  CHECK_THROWS_AS(copy.merge(overlap), EstimatorError);
  CHECK(copy == a);  // failed merge leaves the bank unchanged

  BankMetadata other = metadata_for(4);
  other.sequence.scramble_seed = 1;
  CHECK_THROWS_AS(merge(a, AccumulatorBank(other)), EstimatorError);
  BankMetadata other_policy = metadata_for(4);
  other_policy.policy.kind = BoundaryPolicyKind::Limit;
  CHECK_THROWS_AS(merge(a, AccumulatorBank(other_policy)), EstimatorError);
}

TEST_CASE("eight-way partition of 1e6 points merges to the single-stream bank") {
  constexpr std::uint64_t kPoints = 1000000;
  const BankMetadata meta = metadata_for(4, SequenceKind::GeneralizedFaure);
  AccumulatorBank single(meta);
  fill(single, Manifold::Volume, 0, kPoints);

  std::vector<AccumulatorBank> parts;
  const std::uint64_t step = kPoints / 8;
  for (int k = 0; k < 8; ++k) {
    parts.emplace_back(meta);
    fill(parts.back(), Manifold::Volume, k * step, step);
  }
  AccumulatorBank forward(meta);
  for (const auto& p : parts) forward.merge(p);
  AccumulatorBank shuffled(meta);
  for (int k : {5, 2, 7, 0, 3, 6, 1, 4}) shuffled.merge(parts[static_cast<std::size_t>(k)]);

  CHECK(forward == single);
  CHECK(shuffled == single);
  for (MetricKind m : kAllMetrics) {
    for (Region r : kAllRegions) {
      const double x = single.cell(Manifold::Volume, m, r).sum_w.value();
      const double y = shuffled.cell(Manifold::Volume, m, r).sum_w.value();
      CHECK(x == y);
    }
  }
  CHECK(report_to_json(report(single)) == report_to_json(report(shuffled)));
}

TEST_CASE("checkpoint round trip is bit exact") {
  const BankMetadata meta = metadata_for(4, SequenceKind::PseudoRandom, {Manifold::Volume, Manifold::Hyperarea});
  AccumulatorBank bank(meta);
  fill(bank, Manifold::Volume, 0, 20000);
  bank.record_trace(Manifold::Volume);
  fill(bank, Manifold::Volume, 20000, 5000);
  bank.record_trace(Manifold::Volume);
  fill(bank, Manifold::Hyperarea, 0, 20000);

  const auto path = temp_path("roundtrip.json");
  save_checkpoint(bank, path);
  const AccumulatorBank loaded = load_checkpoint(path);
  CHECK(loaded == bank);
  CHECK(loaded.trace(Manifold::Volume) == bank.trace(Manifold::Volume));
  CHECK(report_to_json(report(loaded)) == report_to_json(report(bank)));
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint guards") {
  AccumulatorBank bank(metadata_for(4));
  fill(bank, Manifold::Volume, 0, 1000);
  const auto path = temp_path("guards.json");
  save_checkpoint(bank, path);
  const std::string good = slurp(path);

  auto replaced = [&](const std::string& from, const std::string& to) {
    std::string text = good;
    const auto at = text.find(from);
    REQUIRE(at != std::string::npos);
    text.replace(at, from.size(), to);
    return text;
  };

  const std::string hash_field = "\"config_hash\": \"" + bank.metadata().hash() + "\"";
  spit(path, replaced(hash_field, "\"config_hash\": \"0000000000000000\""));
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("hash"), CheckpointError);

  spit(path, replaced("\"version\": 1", "\"version\": 2"));
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("version"), CheckpointError);

  // Metadata edited without updating the hash is caught as a mismatch.
  spit(path, replaced("\"separability\": true", "\"separability\": false"));
  CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("hash"), CheckpointError);

  spit(path, good.substr(0, good.size() / 2));
  CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);

  spit(path, replaced("\"sum_w\": [", "\"sum_w\": [\"0xzz\","));
  CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);

  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);
}

TEST_CASE("resume from a checkpoint at 1e5 matches an uninterrupted 2e5 run") {
  const BankMetadata meta = metadata_for(6, SequenceKind::GeneralizedFaure);
  AccumulatorBank straight(meta);
  fill(straight, Manifold::Volume, 0, 200000);

  AccumulatorBank first(meta);
  fill(first, Manifold::Volume, 0, 100000);
  const auto path = temp_path("resume.json");
  save_checkpoint(first, path);
  AccumulatorBank resumed = load_checkpoint(path);
  fill(resumed, Manifold::Volume, 100000, 100000);
  CHECK(resumed == straight);
  CHECK(report_to_json(report(resumed)) == report_to_json(report(straight)));
  std::filesystem::remove(path);
}

TEST_CASE("config hash ignores list order and duplicates") {
  BankMetadata a = metadata_for(6);
  BankMetadata b = a;
  std::reverse(b.metrics.begin(), b.metrics.end());
  b.metrics.push_back(MetricKind::Bures);
  CHECK(a.hash() == b.hash());
  CHECK(a == b);
  BankMetadata c = a;
  c.policy.epsilon = 1e-10;
  CHECK(a.hash() != c.hash());
  CHECK(a.hash().size() == 16);
}

TEST_CASE("report scalings, pooling and probabilities") {
  BankMetadata meta = metadata_for(6, SequenceKind::PseudoRandom);
  AccumulatorBank bank(meta);
  CHECK_THROWS_AS(report(bank), EstimatorError);
  fill(bank, Manifold::Volume, 0, 20000);
  bank.record_trace(Manifold::Volume);
  fill(bank, Manifold::Volume, 20000, 20000);
  bank.record_trace(Manifold::Volume);

  const VolumeReport rep = report(bank);
  CHECK(rep.standard_errors);
  REQUIRE(rep.manifolds.size() == 1);
  const ManifoldReport& mr = rep.manifolds[0];
  CHECK(mr.dimension == 35);
  CHECK(mr.samples == 40000);
  const MetricRow* bures = mr.row(MetricKind::Bures);
  REQUIRE(bures);
  CHECK(bures->ratio_estimated == 1.0);
  CHECK((*bures)[Region::Total].bures_scaled == 1.0);
  CHECK(bures->pooled == doctest::Approx(0.5 * ((*bures)[Region::SepA].estimate + (*bures)[Region::SepB].estimate)));
  CHECK(bures->pooled == 0.5 * ((*bures)[Region::SepA].estimate + (*bures)[Region::SepB].estimate));
  for (const MetricRow& row : mr.rows) {
    for (const RegionStat& s : row.regions) {
      CHECK(s.probability >= 0.0);
      CHECK(s.probability <= 1.0);
      CHECK(std::isfinite(s.standard_error));
    }
    // Known-value and estimated-value scalings agree after renormalization.
    CHECK(row.ratio_known * mr.known_bures / (*bures)[Region::Total].estimate ==
          doctest::Approx(row.ratio_estimated).epsilon(1e-12));
    CHECK(row[Region::Total].estimate ==
          doctest::Approx(mr.flag_constant * bank.cell(Manifold::Volume, row.metric, Region::Total).sum_w.value() /
                          40000.0)
              .epsilon(1e-15));
  }
  CHECK(mr.raw_pass_fraction[0] == 1.0);
  CHECK(mr.raw_pass_fraction[region_index(Region::SepA)] > 0.0);
  CHECK(mr.conjectures.km_conjectured == 32768.0);
  CHECK(mr.conjectures.km_reference == kReferenceKmRatio);
  CHECK(mr.conjectures.sd_factor == std::ldexp(1.0, 35));
  CHECK(std::isnan(mr.conjectures.silver_sd_target));
  REQUIRE(mr.trace.size() == 2);
  CHECK(mr.trace[1].samples == 40000);
  CHECK(mr.trace[1].value == doctest::Approx(bures->ratio_known).epsilon(1e-14));
  CHECK(std::isfinite(mr.last_relative_change));
}

TEST_CASE("standard errors only for pseudo-random streams") {
  AccumulatorBank bank(metadata_for(3, SequenceKind::Halton));
  fill(bank, Manifold::Volume, 0, 1000);
  const VolumeReport rep = report(bank);
  CHECK_FALSE(rep.standard_errors);
  CHECK_FALSE(rep.separability);
  for (const MetricRow& row : rep.manifolds[0].rows) CHECK(std::isnan(row[Region::Total].standard_error));
  CHECK(std::isnan(rep.manifolds[0].conjectures.km_reference));
  CHECK(std::isnan(rep.manifolds[0].last_relative_change));
}

TEST_CASE("silver-mean comparison is filled at N=4") {
  AccumulatorBank bank(metadata_for(4, SequenceKind::Halton));
  fill(bank, Manifold::Volume, 0, 2000);
  const ConjectureReport& cj = report(bank).manifolds[0].conjectures;
  CHECK(cj.silver_sd_target == doctest::Approx(ConjectureConstants::silver_mean / 3.0));
  CHECK(cj.silver_km_target == doctest::Approx(10.0 * ConjectureConstants::silver_mean));
  CHECK(std::isfinite(cj.silver_sd_separable));
  CHECK(std::isfinite(cj.silver_km_separable));
}

TEST_CASE("report JSON round trips") {
  AccumulatorBank bank(metadata_for(4, SequenceKind::PseudoRandom, {Manifold::Volume, Manifold::Hyperarea}));
  fill(bank, Manifold::Volume, 0, 3000);
  bank.record_trace(Manifold::Volume);
  fill(bank, Manifold::Hyperarea, 0, 3000);
  const std::string text = report_to_json(report(bank));
  const VolumeReport parsed = report_from_json(text);
  CHECK(report_to_json(parsed) == text);
  CHECK(parsed.manifolds.size() == 2);
  CHECK_THROWS_AS(report_from_json("{\"n\": 4}"), EstimatorError);
}
