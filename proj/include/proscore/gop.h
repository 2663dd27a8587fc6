// proscore/include/proscore/gop.h

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

#ifndef PROSCORE_GOP_H_
#define PROSCORE_GOP_H_

#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "proscore/corpus.h"

namespace proscore {

/// Floor applied to segment posteriors before taking logs.
inline constexpr double kPosteriorFloor = 1e-12;

/// How frame posteriors inside a segment are pooled.
enum class SegmentPooling {
  kMeanThenLog,  ///< log of the mean frame posterior (default)
  kMeanOfLog,    ///< mean of floored frame log-posteriors
};

struct GopResult {
  std::string utterance_id;
  /// (phone id, segment log-posterior) in alignment order.
  std::vector<std::pair<int, double>> per_phone;
  double gop = 0.0;
};

/// Mean posterior of the segment's phone over its frames. Throws
/// std::invalid_argument for empty or out-of-range segments.
double SegmentPosterior(const PosteriorGram& pg, const PhoneSegment& segment);

/// log segment posterior under the chosen pooling, floored at kPosteriorFloor.
double SegmentLogPosterior(const PosteriorGram& pg, const PhoneSegment& segment,
                           SegmentPooling pooling = SegmentPooling::kMeanThenLog);

/// Average segment log-posterior of the canonical phones.
GopResult GopScore(const PosteriorGram& pg, const PhoneAlignment& al,
                   SegmentPooling pooling = SegmentPooling::kMeanThenLog);

/// GOP plus the marginal and prior terms: the average over segments of
/// log p(q|o) + log p(o) - log p(q), where log p(o) for a segment is the mean
/// of the frame marginal log-likelihoods it covers.
double ConditionalScore(const PosteriorGram& pg, std::span<const double> frame_marginal_loglik,
                        const PhonePrior& prior, const PhoneAlignment& al,
                        SegmentPooling pooling = SegmentPooling::kMeanThenLog);

// Two-phone competition: phones q1 and q2 are 1-D Gaussians with variance 0.5
// whose means are `a` apart; o sits at mu2 shifted by delta, with positive
// delta pointing away from q1.
struct CompetitionPoint {
  double a = 0.0;
  double delta = 0.0;
  double posterior = 0.0;  ///< p(q2 | o)
};

CompetitionPoint SimulateCompetition(double a, double delta);
std::vector<CompetitionPoint> CompetitionSweep(double a, std::span<const double> deltas);

/// Writes "a\tdelta\tposterior" followed by one row per point.
void WriteCompetitionTsv(std::ostream& out, const std::vector<CompetitionPoint>& points);

}  // namespace proscore

#endif  // PROSCORE_GOP_H_
