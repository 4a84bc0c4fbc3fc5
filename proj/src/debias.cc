// Copyright 2026 The CFSA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cfsa/debias.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cfsa/error.h"
#include "cfsa/rng.h"

namespace cfsa {
namespace {

using Wide = __int128;

Wide Abs(Wide v) { return v < 0 ? -v : v; }

// An integer removal pair scored exactly: gap = gap_num / gap_den.
struct Candidate {
  std::size_t a = 0;  // FG removals
  std::size_t b = 0;  // DR removals
  Wide gap_num = 0;
  Wide gap_den = 1;
  Wide residual = 0;

  bool BetterThan(const Candidate& o) const {
    const Wide lhs = gap_num * o.gap_den;
    const Wide rhs = o.gap_num * gap_den;
    if (lhs != rhs) return lhs < rhs;
    if (residual != o.residual) return residual < o.residual;
    return a + b < o.a + o.b;
  }
};

Candidate Score(const SubgroupCounts& c, std::size_t a, std::size_t b) {
  const Wide fav_granted = static_cast<Wide>(c.fg - a);
  const Wide fav_total = static_cast<Wide>(c.favored() - a);
  const Wide dep_total = static_cast<Wide>(c.deprived() - b);
  Candidate out;
  out.a = a;
  out.b = b;
  out.gap_num = Abs(fav_granted * dep_total - static_cast<Wide>(c.dg) * fav_total);
  out.gap_den = fav_total * dep_total;
  out.residual = Abs(static_cast<Wide>(a) * static_cast<Wide>(c.deprived()) -
                     static_cast<Wide>(b) * static_cast<Wide>(c.favored()));
  return out;
}

}  // namespace

SubgroupCounts SubgroupCounts::Of(const Dataset& d, std::string_view sensitive) {
  const auto p = Partition(d, sensitive);
  return {p.fg.size(), p.fr.size(), p.dg.size(), p.dr.size()};
}

double SubgroupCounts::GrantRateGap() const {
  const double fav = favored() ? static_cast<double>(fg) / static_cast<double>(favored()) : 0.0;
  const double dep = deprived() ? static_cast<double>(dg) / static_cast<double>(deprived()) : 0.0;
  return std::abs(fav - dep);
}

RemovalPlan ComputeRemovals(const SubgroupCounts& c) {
  if (c.favored() == 0 || c.deprived() == 0) {
    throw Error(ErrorKind::kValidation,
                "both the favored and the deprived group need at least one row");
  }
  RemovalPlan plan;
  plan.counts_before = c;
  const double fg = static_cast<double>(c.fg);
  const double fr = static_cast<double>(c.fr);
  const double dg = static_cast<double>(c.dg);
  const double dr = static_cast<double>(c.dr);
  // Deprived already granted more often: nothing to undersample.
  if (static_cast<Wide>(c.dg) * static_cast<Wide>(c.favored()) >
      static_cast<Wide>(c.fg) * static_cast<Wide>(c.deprived())) {
    spdlog::warn("deprived grant rate exceeds favored grant rate ({}/{} vs {}/{}); "
                 "using the zero removal plan",
                 c.dg, c.deprived(), c.fg, c.favored());
    plan.inverted = true;
    return plan;
  }

  // With FG_remove = r*x and x = DR_remove, equal grant rates reduce to
  //   r x^2 - (FG + r DR) x + (FG DR - DG FR) = 0.
  const double r = static_cast<double>(c.favored()) / static_cast<double>(c.deprived());
  const double qa = r;
  const double qb = -(fg + r * dr);
  const double qc = fg * dr - dg * fr;
  const double disc = qb * qb - 4.0 * qa * qc;
  const double sq = std::sqrt(std::max(disc, 0.0));
  // Numerically stable pair of roots.
  const double q = -0.5 * (qb + std::copysign(sq, qb));
  double roots[2] = {q / qa, q != 0.0 ? qc / q : 0.0};
  if (roots[0] > roots[1]) std::swap(roots[0], roots[1]);
  const double slack = 1e-9 * std::max(1.0, dr + fg);
  bool feasible = false;
  for (double x : roots) {
    if (disc >= -slack && x >= -slack && x <= dr + slack && r * x <= fg + slack) {
      plan.real_dr_remove = std::max(0.0, x);
      feasible = true;
      break;
    }
  }
  if (!feasible) {
    throw Error(ErrorKind::kInfeasibleRebalance,
                fmt::format("no feasible removal count for (FG,FR,DG,DR)=({},{},{},{}); "
                            "roots {} and {}",
                            c.fg, c.fr, c.dg, c.dr, roots[0], roots[1]));
  }

  // Integer settlement. Start from the rounded neighbours of (r x, x), then
  // sweep every FG removal count with its best DR partner(s): for fixed a the
  // deprived rate is monotone in b, so the optimum sits next to the crossing.
  const std::size_t b_max = std::min(c.dr, c.deprived() - 1);
  const std::size_t a_max = std::min(c.fg, c.favored() - 1);
  auto clamp_b = [&](double v) {
    if (!(v > 0.0)) return std::size_t{0};
    return std::min(b_max, static_cast<std::size_t>(v));
  };
  auto clamp_a = [&](double v) {
    if (!(v > 0.0)) return std::size_t{0};
    return std::min(a_max, static_cast<std::size_t>(v));
  };

  const double x = plan.real_dr_remove;
  Candidate best = Score(c, clamp_a(std::floor(r * x)), clamp_b(std::floor(x)));
  for (double fa : {std::floor(r * x), std::ceil(r * x)}) {
    for (double fb : {std::floor(x), std::ceil(x)}) {
      const Candidate cand = Score(c, clamp_a(fa), clamp_b(fb));
      if (cand.BetterThan(best)) best = cand;
    }
  }
  const double dep_total = static_cast<double>(c.deprived());
  const double fav_total = static_cast<double>(c.favored());
  for (std::size_t a = 0; a <= a_max; ++a) {
    const double fav_granted = fg - static_cast<double>(a);
    const double fav_size = fav_total - static_cast<double>(a);
    std::size_t picks[6] = {0, b_max, 0, 0, 0, 0};
    if (fav_granted > 0.0) {
      const double crossing = dep_total - dg * fav_size / fav_granted;
      picks[2] = clamp_b(std::floor(crossing));
      picks[3] = clamp_b(std::ceil(crossing));
    }
    const double ratio_b = static_cast<double>(a) * dep_total / fav_total;
    picks[4] = clamp_b(std::floor(ratio_b));
    picks[5] = clamp_b(std::ceil(ratio_b));
    for (std::size_t b : picks) {
      const Candidate cand = Score(c, a, b);
      if (cand.BetterThan(best)) best = cand;
    }
  }
  plan.fg_remove = best.a;
  plan.dr_remove = best.b;
  return plan;
}

RebalanceResult Rebalance(const Dataset& train, std::string_view sensitive,
                          const CBList& cblist, const RemovalPlan& plan) {
  const auto s = train.SensitiveValues(sensitive);
  std::unordered_map<RowId, std::size_t> index;
  for (std::size_t i = 0; i < train.rows(); ++i) index.emplace(train.row_id(i), i);

  const auto counts = SubgroupCounts::Of(train, sensitive);
  if (plan.fg_remove > counts.fg || plan.dr_remove > counts.dr) {
    throw Error(ErrorKind::kValidation,
                fmt::format("removal plan ({}, {}) exceeds subgroup sizes FG={} DR={}",
                            plan.fg_remove, plan.dr_remove, counts.fg, counts.dr));
  }

  std::vector<bool> drop(train.rows(), false);
  std::vector<std::size_t> removed_dr;
  RebalanceResult out;
  std::size_t fg_left = plan.fg_remove;
  std::size_t dr_left = plan.dr_remove;
  for (const BiasScore& e : cblist.entries()) {
    if (fg_left == 0 && dr_left == 0) break;
    const auto it = index.find(e.row_id);
    if (it == index.end()) continue;
    const std::size_t i = it->second;
    const Subgroup g = SubgroupOf(s[i], train.label(i));
    if (g == Subgroup::kFG && fg_left > 0) {
      drop[i] = true;
      out.removed_fg.push_back(e.row_id);
      --fg_left;
    } else if (g == Subgroup::kDR && dr_left > 0) {
      drop[i] = true;
      removed_dr.push_back(i);
      --dr_left;
    }
  }
  if (fg_left != 0 || dr_left != 0) {
    throw Error(ErrorKind::kValidation, "CBList does not cover the rows the plan removes");
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < train.rows(); ++i) {
    if (!drop[i]) keep.push_back(i);
  }
  out.data = train.Subset(keep);
  out.removed_dr = train.Subset(removed_dr);
  return out;
}

Synthesizer MakeSynthesizer(SynthConfig base) {
  return [base](const Dataset& subgroup, std::string_view sensitive, std::size_t n_new,
                std::uint64_t seed, RowId first_id) {
    SynthConfig cfg = base;
    cfg.seed = seed;
    return Synthesize(subgroup, sensitive, n_new, cfg, first_id);
  };
}

CorrectionResult CorrectLabels(const Dataset& rebalanced, std::string_view sensitive,
                               const CBList& cblist, const Dataset& removed_dr,
                               const Synthesizer& synth, std::uint64_t seed,
                               RowId first_id) {
  const auto s = rebalanced.SensitiveValues(sensitive);
  CorrectionResult out;
  DebiasReport& report = out.report;

  // 1. Drop counterfactually unfair FR and DG rows.
  DatasetBuilder kept(rebalanced);
  std::vector<std::size_t> dg_rows, fr_rows;
  for (std::size_t i = 0; i < rebalanced.rows(); ++i) {
    const Subgroup g = SubgroupOf(s[i], rebalanced.label(i));
    if (g == Subgroup::kFR || g == Subgroup::kDG) {
      const BiasScore* score = cblist.Find(rebalanced.row_id(i));
      if (!score) {
        throw Error(ErrorKind::kValidation,
                    fmt::format("row {} has no CBList entry", rebalanced.row_id(i)));
      }
      if (score->cbtest > 1.0) {
        ++(g == Subgroup::kFR ? report.fr_removed : report.dg_removed);
        continue;
      }
      (g == Subgroup::kFR ? fr_rows : dg_rows).push_back(i);
    }
    kept.AddRow(rebalanced, i);
  }

  // 2. Relabel removed DR rows whose prediction flips with S, best evidence
  // first, up to the number of DG rows just removed.
  std::vector<std::pair<const BiasScore*, std::size_t>> candidates;
  for (std::size_t i = 0; i < removed_dr.rows(); ++i) {
    const BiasScore* score = cblist.Find(removed_dr.row_id(i));
    if (!score) {
      throw Error(ErrorKind::kValidation,
                  fmt::format("removed row {} has no CBList entry", removed_dr.row_id(i)));
    }
    if (score->cftest == 1) candidates.emplace_back(score, i);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const auto& x, const auto& y) {
    if (x.first->cbtest != y.first->cbtest) return x.first->cbtest > y.first->cbtest;
    return x.first->row_id < y.first->row_id;
  });
  const std::size_t flips = std::min(report.dg_removed, candidates.size());
  for (std::size_t k = 0; k < flips; ++k) {
    const std::size_t i = candidates[k].second;
    kept.Add(removed_dr.row(i), 1, removed_dr.row_id(i), removed_dr.synthetic(i));
    out.flipped.push_back(removed_dr.row_id(i));
  }
  report.dr_flipped_to_dg = flips;

  // 3. Top up DG and FR with synthetic rows drawn from the retained rows.
  report.synthesized_dg = report.dg_removed - flips;
  report.synthesized_fr = report.fr_removed;
  RowId next_id = first_id;
  auto top_up = [&](const std::vector<std::size_t>& rows, std::size_t count,
                    std::uint64_t stream, std::string_view name) {
    if (count == 0) return;
    Dataset made;
    try {
      made = synth(rebalanced.Subset(rows), sensitive, count, DeriveSeed(seed, stream), next_id);
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("synthesizing {} {} rows: {}", count, name, e.what()));
    }
    if (made.rows() != count) {
      throw Error(ErrorKind::kSynthesisInfeasible,
                  fmt::format("synthesizer returned {} {} rows, expected {}", made.rows(),
                              name, count));
    }
    kept.AddAll(made);
    next_id = std::max(next_id, made.NextRowId());
  };
  top_up(dg_rows, report.synthesized_dg, 0, "DG");
  top_up(fr_rows, report.synthesized_fr, 1, "FR");

  out.data = std::move(kept).Build();
  report.final_counts = SubgroupCounts::Of(out.data, sensitive);
  return out;
}

DebiasResult Debias(const Dataset& train, std::string_view sensitive, const CBList& cblist,
                    const Synthesizer& synth, std::uint64_t seed) {
  const RemovalPlan plan = ComputeRemovals(SubgroupCounts::Of(train, sensitive));
  RebalanceResult rebalanced = Rebalance(train, sensitive, cblist, plan);
  RowId first_id = train.NextRowId();
  for (const auto& e : cblist.entries()) first_id = std::max(first_id, e.row_id + 1);
  CorrectionResult corrected = CorrectLabels(rebalanced.data, sensitive, cblist,
                                             rebalanced.removed_dr, synth, seed, first_id);
  DebiasResult out;
  out.data = std::move(corrected.data);
  out.report = corrected.report;
  out.report.removal_plan = plan;
  out.removed_fg = std::move(rebalanced.removed_fg);
  out.removed_dr = rebalanced.removed_dr.row_ids();
  out.flipped = std::move(corrected.flipped);
  return out;
}

nlohmann::json ToJson(const SubgroupCounts& c) {
  return {{"FG", c.fg}, {"FR", c.fr}, {"DG", c.dg}, {"DR", c.dr}};
}

nlohmann::json DebiasReport::ToJson() const {
  return {{"removal_plan",
           {{"fg_remove", removal_plan.fg_remove},
            {"dr_remove", removal_plan.dr_remove},
            {"real_dr_remove", removal_plan.real_dr_remove},
            {"inverted", removal_plan.inverted},
            {"counts_before", cfsa::ToJson(removal_plan.counts_before)}}},
          {"fr_removed", fr_removed},
          {"dg_removed", dg_removed},
          {"dr_flipped_to_dg", dr_flipped_to_dg},
          {"synthesized_dg", synthesized_dg},
          {"synthesized_fr", synthesized_fr},
          {"final_counts", cfsa::ToJson(final_counts)},
          {"final_grant_rate_gap", final_counts.GrantRateGap()}};
}

}  // namespace cfsa
