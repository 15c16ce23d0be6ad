// Copyright 2026 The rvpan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rvpan/metrics.hpp"

#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

namespace rvpan {

namespace {

// (class, instance); instance is 0 for stuff segments.
using SegmentKey = std::pair<std::int32_t, std::int32_t>;

struct Segments {
  std::map<SegmentKey, std::size_t> area;
};

// Returns false for points that do not form part of any segment (thing
// points without an instance, or the ignore class).
bool SegmentOf(std::int32_t cls, std::int32_t inst, const ClassRegistry& registry,
               std::int32_t ignore, SegmentKey& key) {
  if (cls == ignore) return false;
  if (registry.is_thing(cls)) {
    if (inst <= 0) return false;
    key = {cls, inst};
  } else {
    key = {cls, 0};
  }
  return true;
}

}  // namespace

double ClassMatches::iou_sum() const {
  return std::accumulate(tp_ious.begin(), tp_ious.end(), 0.0);
}

SegmentMatches MatchSegments(const PanopticLabeling& pred, const PanopticLabeling& gt,
                             const EvalOptions& options) {
  const std::size_t n = gt.semantic.size();
  if (pred.semantic.size() != n || pred.instance.size() != n || gt.instance.size() != n) {
    throw Error(ErrorCode::kShapeError, "prediction and ground truth differ in point count");
  }
  const ClassRegistry& registry = gt.registry;
  const std::int32_t ignore = options.ignore_class;

  SegmentMatches out;
  out.registry = registry;

  std::map<std::int32_t, std::size_t> sem_pred, sem_gt, sem_inter;
  Segments pred_segments, gt_segments;
  std::map<std::pair<SegmentKey, SegmentKey>, std::size_t> overlap;

  for (std::size_t i = 0; i < n; ++i) {
    const std::int32_t g = gt.semantic[i];
    if (g == ignore) continue;
    const std::int32_t p = pred.semantic[i];
    ++sem_gt[g];
    if (p != ignore) ++sem_pred[p];
    if (p == g) ++sem_inter[g];

    SegmentKey gk, pk;
    const bool has_gt = SegmentOf(g, gt.instance[i], registry, ignore, gk);
    const bool has_pred = SegmentOf(p, pred.instance[i], registry, ignore, pk);
    if (has_gt) ++gt_segments.area[gk];
    if (has_pred) ++pred_segments.area[pk];
    if (has_gt && has_pred && gk.first == pk.first) ++overlap[{pk, gk}];
  }

  auto large_enough = [&](const SegmentKey& key, std::size_t area) {
    return !registry.is_thing(key.first) || area >= options.min_points;
  };

  std::set<SegmentKey> matched_pred, matched_gt;
  for (const auto& [pair, inter] : overlap) {
    const auto& [pk, gk] = pair;
    const std::size_t g_area = gt_segments.area[gk];
    if (!large_enough(gk, g_area)) continue;
    const std::size_t uni = pred_segments.area[pk] + g_area - inter;
    const double iou = static_cast<double>(inter) / static_cast<double>(uni);
    if (iou > 0.5) {
      // IoU > 0.5 admits at most one partner per segment.
      if (matched_pred.count(pk) || matched_gt.count(gk)) {
        throw Error(ErrorCode::kConsistencyError, "segment matched twice");
      }
      matched_pred.insert(pk);
      matched_gt.insert(gk);
      auto& cm = out.per_class[gk.first];
      ++cm.tp;
      cm.tp_ious.push_back(iou);
    }
  }
  for (const auto& [key, area] : gt_segments.area) {
    if (!large_enough(key, area) || matched_gt.count(key)) continue;
    ++out.per_class[key.first].fn;
  }
  for (const auto& [key, area] : pred_segments.area) {
    if (!large_enough(key, area) || matched_pred.count(key)) continue;
    ++out.per_class[key.first].fp;
  }

  std::set<std::int32_t> classes;
  for (const auto& [c, count] : sem_gt) classes.insert(c);
  for (const auto& [c, count] : sem_pred) classes.insert(c);
  for (std::int32_t c : classes) {
    auto& cm = out.per_class[c];
    cm.sem_intersection = sem_inter[c];
    cm.sem_union = sem_gt[c] + sem_pred[c] - sem_inter[c];
  }
  return out;
}

PqReport PanopticQuality(const SegmentMatches& matches) {
  PqReport report;
  double pq = 0, pq_dag = 0, rq = 0, sq = 0, iou = 0;
  double pq_th = 0, rq_th = 0, sq_th = 0, pq_st = 0, rq_st = 0, sq_st = 0;
  int n = 0, n_th = 0, n_st = 0, n_iou = 0;

  for (const auto& [c, m] : matches.per_class) {
    ClassQuality q;
    q.tp = m.tp;
    q.fp = m.fp;
    q.fn = m.fn;
    q.is_thing = matches.registry.is_thing(c);
    q.sq = m.tp > 0 ? m.iou_sum() / static_cast<double>(m.tp) : 0.0;
    const double denom = static_cast<double>(m.tp) + 0.5 * static_cast<double>(m.fp) +
                         0.5 * static_cast<double>(m.fn);
    q.rq = denom > 0.0 ? static_cast<double>(m.tp) / denom : 0.0;
    q.pq = q.sq * q.rq;
    q.iou = m.sem_union > 0
                ? static_cast<double>(m.sem_intersection) / static_cast<double>(m.sem_union)
                : 0.0;
    report.per_class[c] = q;

    if (m.sem_union > 0) {
      iou += q.iou;
      ++n_iou;
    }
    if (m.tp + m.fp + m.fn == 0) continue;
    pq += q.pq;
    rq += q.rq;
    sq += q.sq;
    pq_dag += q.is_thing ? q.pq : q.iou;
    ++n;
    if (q.is_thing) {
      pq_th += q.pq;
      rq_th += q.rq;
      sq_th += q.sq;
      ++n_th;
    } else {
      pq_st += q.pq;
      rq_st += q.rq;
      sq_st += q.sq;
      ++n_st;
    }
  }
  auto mean = [](double s, int k) { return k > 0 ? s / k : 0.0; };
  report.pq = mean(pq, n);
  report.pq_dagger = mean(pq_dag, n);
  report.rq = mean(rq, n);
  report.sq = mean(sq, n);
  report.pq_things = mean(pq_th, n_th);
  report.rq_things = mean(rq_th, n_th);
  report.sq_things = mean(sq_th, n_th);
  report.pq_stuff = mean(pq_st, n_st);
  report.rq_stuff = mean(rq_st, n_st);
  report.sq_stuff = mean(sq_st, n_st);
  report.miou = mean(iou, n_iou);
  return report;
}

PqReport Evaluate(const PanopticLabeling& pred, const PanopticLabeling& gt,
                  const EvalOptions& options) {
  return PanopticQuality(MatchSegments(pred, gt, options));
}

IouReport MeanIou(const std::vector<std::int32_t>& pred, const std::vector<std::int32_t>& gt,
                  int num_classes, std::int32_t ignore) {
  if (pred.size() != gt.size()) {
    throw Error(ErrorCode::kShapeError, "prediction and ground truth differ in point count");
  }
  std::vector<std::size_t> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  auto in_range = [&](std::int32_t c) { return c >= 0 && c < num_classes; };
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const std::int32_t g = gt[i];
    const std::int32_t p = pred[i];
    if (g == ignore) continue;
    if (!in_range(g) || !in_range(p)) {
      throw Error(ErrorCode::kLabelError, "class id outside [0, num_classes)");
    }
    if (p == g) {
      ++tp[g];
    } else {
      ++fn[g];
      if (p != ignore) ++fp[p];
    }
  }
  IouReport out;
  double sum = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    if (c == ignore) continue;
    const std::size_t uni = tp[c] + fp[c] + fn[c];
    if (uni == 0) continue;
    const double v = static_cast<double>(tp[c]) / static_cast<double>(uni);
    out.per_class[c] = v;
    sum += v;
  }
  out.miou = out.per_class.empty() ? 0.0 : sum / static_cast<double>(out.per_class.size());
  return out;
}

std::string FormatReportTable(const PqReport& r) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof(line), "%-8s %-6s %7s %7s %7s %7s %6s %6s %6s\n", "class", "kind",
                "PQ", "RQ", "SQ", "IoU", "TP", "FP", "FN");
  os << line;
  for (const auto& [c, q] : r.per_class) {
    std::snprintf(line, sizeof(line), "%-8d %-6s %7.4f %7.4f %7.4f %7.4f %6zu %6zu %6zu\n", c,
                  q.is_thing ? "thing" : "stuff", q.pq, q.rq, q.sq, q.iou, q.tp, q.fp, q.fn);
    os << line;
  }
  std::snprintf(line, sizeof(line),
                "PQ %.4f  PQ+ %.4f  RQ %.4f  SQ %.4f  mIoU %.4f\n"
                "PQ_th %.4f  RQ_th %.4f  SQ_th %.4f\n"
                "PQ_st %.4f  RQ_st %.4f  SQ_st %.4f\n",
                r.pq, r.pq_dagger, r.rq, r.sq, r.miou, r.pq_things, r.rq_things, r.sq_things,
                r.pq_stuff, r.rq_stuff, r.sq_stuff);
  os << line;
  return os.str();
}

std::string FormatReportKeyValue(const PqReport& r) {
  std::ostringstream os;
  os.precision(9);
  os << "pq=" << r.pq << "\n"
     << "pq_dagger=" << r.pq_dagger << "\n"
     << "rq=" << r.rq << "\n"
     << "sq=" << r.sq << "\n"
     << "pq_things=" << r.pq_things << "\n"
     << "rq_things=" << r.rq_things << "\n"
     << "sq_things=" << r.sq_things << "\n"
     << "pq_stuff=" << r.pq_stuff << "\n"
     << "rq_stuff=" << r.rq_stuff << "\n"
     << "sq_stuff=" << r.sq_stuff << "\n"
     << "miou=" << r.miou << "\n";
  for (const auto& [c, q] : r.per_class) {
    const std::string p = "class." + std::to_string(c) + ".";
    os << p << "pq=" << q.pq << "\n"
       << p << "rq=" << q.rq << "\n"
       << p << "sq=" << q.sq << "\n"
       << p << "iou=" << q.iou << "\n"
       << p << "tp=" << q.tp << "\n"
       << p << "fp=" << q.fp << "\n"
       << p << "fn=" << q.fn << "\n";
  }
  return os.str();
}

}  // namespace rvpan
