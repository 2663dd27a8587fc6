// proscore/src/gop.cc

// Copyright 2026  The proscore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "proscore/gop.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <stdexcept>

namespace proscore {

namespace {

void CheckSegment(const PosteriorGram& pg, const PhoneSegment& s) {
  if (s.end <= s.start) throw std::invalid_argument("empty segment in " + pg.utterance_id);
  if (s.start < 0 || s.end > pg.post.rows() || s.phone < 0 || s.phone >= pg.post.cols()) {
    throw std::invalid_argument("segment outside posteriorgram bounds in " + pg.utterance_id);
  }
}

}  // namespace

double SegmentPosterior(const PosteriorGram& pg, const PhoneSegment& segment) {
  CheckSegment(pg, segment);
  double sum = 0.0;
  for (int t = segment.start; t < segment.end; ++t) sum += pg.post(t, segment.phone);
  return sum / segment.length();
}

double SegmentLogPosterior(const PosteriorGram& pg, const PhoneSegment& segment,
                           SegmentPooling pooling) {
  if (pooling == SegmentPooling::kMeanThenLog) {
    return std::log(std::max(SegmentPosterior(pg, segment), kPosteriorFloor));
  }
  CheckSegment(pg, segment);
  double sum = 0.0;
  for (int t = segment.start; t < segment.end; ++t) {
    sum += std::log(std::max(pg.post(t, segment.phone), kPosteriorFloor));
  }
  return sum / segment.length();
}

GopResult GopScore(const PosteriorGram& pg, const PhoneAlignment& al, SegmentPooling pooling) {
  if (pg.utterance_id != al.utterance_id) {
    throw DataError("GOP: posteriorgram " + pg.utterance_id + " paired with alignment " +
                    al.utterance_id);
  }
  if (al.segments.empty()) throw DataError("GOP: empty alignment for " + al.utterance_id);
  if (al.segments.back().end > pg.post.rows()) {
    throw DataError("GOP: alignment of " + al.utterance_id + " extends past frame " +
                    std::to_string(pg.post.rows()));
  }
  GopResult r{pg.utterance_id, {}, 0.0};
  double sum = 0.0;
  for (const auto& s : al.segments) {
    const double lp = SegmentLogPosterior(pg, s, pooling);
    r.per_phone.emplace_back(s.phone, lp);
    sum += lp;
  }
  r.gop = sum / static_cast<double>(al.segments.size());
  return r;
}

double ConditionalScore(const PosteriorGram& pg, std::span<const double> frame_marginal_loglik,
                        const PhonePrior& prior, const PhoneAlignment& al, SegmentPooling pooling) {
  if (static_cast<Eigen::Index>(frame_marginal_loglik.size()) != pg.post.rows()) {
    throw DataError("conditional score: " + std::to_string(frame_marginal_loglik.size()) +
                    " marginal values for " + std::to_string(pg.post.rows()) + " frames");
  }
  if (prior.prior.size() != pg.post.cols()) {
    throw DataError("conditional score: prior has " + std::to_string(prior.prior.size()) +
                    " phones, posteriorgram has " + std::to_string(pg.post.cols()));
  }
  ValidatePrior(prior);
  const GopResult gop = GopScore(pg, al, pooling);
  double sum = 0.0;
  for (size_t i = 0; i < al.segments.size(); ++i) {
    const auto& s = al.segments[i];
    double marginal = 0.0;
    for (int t = s.start; t < s.end; ++t) marginal += frame_marginal_loglik[static_cast<size_t>(t)];
    marginal /= s.length();
    sum += gop.per_phone[i].second + marginal - std::log(prior.prior(s.phone));
  }
  return sum / static_cast<double>(al.segments.size());
}

CompetitionPoint SimulateCompetition(double a, double delta) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw std::invalid_argument("competition: distance a must be > 0");
  }
  if (!std::isfinite(delta)) throw std::invalid_argument("competition: delta must be finite");
  // exp(-d^2) kernels (variance 0.5): the log-odds of q2 over q1 at o is
  // (a + delta)^2 - delta^2 = a^2 + 2 a delta.
  const double log_odds = a * a + 2.0 * a * delta;
  return {a, delta, 1.0 / (1.0 + std::exp(-log_odds))};
}

std::vector<CompetitionPoint> CompetitionSweep(double a, std::span<const double> deltas) {
  std::vector<CompetitionPoint> out;
  out.reserve(deltas.size());
  for (double d : deltas) out.push_back(SimulateCompetition(a, d));
  return out;
}

void WriteCompetitionTsv(std::ostream& out, const std::vector<CompetitionPoint>& points) {
  out << "a\tdelta\tposterior\n";
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(10);
  for (const auto& p : points) out << p.a << '\t' << p.delta << '\t' << p.posterior << '\n';
  out.flags(flags);
  out.precision(prec);
}

}  // namespace proscore
