#include "occpred/fusion.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace occpred {

namespace {

Matrix7 diag7(const std::array<double, 7>& d) {
  Matrix7 m = Matrix7::Zero();
  for (int i = 0; i < 7; ++i) m(i, i) = d[static_cast<std::size_t>(i)];
  return m;
}

void symmetrize(Matrix7& P) { P = 0.5 * (P + P.transpose()).eval(); }

void check_psd(const Matrix7& P, const char* where) {
  if (min_eigenvalue(P) < -kPsdTolerance) {
    throw std::logic_error(std::string(where) + ": covariance lost positive semi-definiteness");
  }
}

// Keeps the embedded shape block a valid covariance after mixing.
void repair_shape(Vector7& x) {
  const double off = 0.5 * (x(2) + x(3));
  x(2) = off;
  x(3) = off;
  Eigen::Matrix2d c;
  c << x(1), off, off, x(4);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(c);
  if (es.eigenvalues().minCoeff() >= 0.0) return;
  const Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0);
  const Eigen::Matrix2d fixed = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
  x(1) = fixed(0, 0);
  x(2) = x(3) = 0.5 * (fixed(0, 1) + fixed(1, 0));
  x(4) = fixed(1, 1);
}

void merge_contributor(std::vector<AgentId>& ids, const std::optional<AgentId>& id) {
  if (!id) return;
  auto it = std::lower_bound(ids.begin(), ids.end(), *id);
  if (it == ids.end() || *it != *id) ids.insert(it, *id);
}

}  // namespace

double min_eigenvalue(const Matrix7& P) {
  const Matrix7 sym = 0.5 * (P + P.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix7> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Vector7 to_state(const GaussianObstacle& obs, double reference_time) {
  Vector7 z;
  z << obs.t_occ - reference_time, obs.cov.xx, obs.cov.xy, obs.cov.yx, obs.cov.yy, obs.mean.x, obs.mean.y;
  return z;
}

double covariance_scale(double t_occ, double now, const PipelineConfig& cfg) {
  const double dt = t_occ - now;
  return cfg.c1 - std::exp(-cfg.c2 * dt * dt);
}

FusionTrack init_track(const GaussianObstacle& obs, double now, const PipelineConfig& cfg, TrackId id) {
  FusionTrack t;
  t.x = to_state(obs, now);
  t.P = diag7(cfg.p_init);
  t.last_update = now;
  t.last_predict = now;
  t.reference_time = now;
  t.created_at = now;
  t.track_id = id;
  merge_contributor(t.contributors, obs.source_agent);
  t.n_measurements = 1;
  return t;
}

FusionTrack rereference(FusionTrack track, double now) {
  track.x(0) -= now - track.reference_time;
  track.reference_time = now;
  return track;
}

FusionTrack predict_step(FusionTrack track, double now, const PipelineConfig& cfg) {
  const double elapsed = now - track.last_predict;
  if (elapsed < 0.0) {
    throw std::invalid_argument("predict_step: time moved backwards for track " + std::to_string(track.track_id));
  }
  const double scale = covariance_scale(track.t_occ(), now, cfg);
  track.P += (scale * elapsed) * diag7(cfg.q_base);
  symmetrize(track.P);
  check_psd(track.P, "predict_step");
  track.last_predict = now;
  return track;
}

FusionTrack correct_step(FusionTrack track, const std::vector<GaussianObstacle>& measurements, double now,
                         const PipelineConfig& cfg) {
  if (measurements.empty()) return track;
  const Matrix7 r_base = diag7(cfg.r_base);
  const Matrix7 identity = Matrix7::Identity();
  for (const auto& m : measurements) {
    const Matrix7 R = covariance_scale(m.t_occ, now, cfg) * r_base;
    const Vector7 z = to_state(m, track.reference_time);
    const Matrix7 S = track.P + R;
    // K = P S^-1, computed as (S^-1 P)^T since both are symmetric.
    const Matrix7 K = S.ldlt().solve(track.P).transpose();
    track.x += K * (z - track.x);
    const Matrix7 IK = identity - K;
    track.P = IK * track.P * IK.transpose() + K * R * K.transpose();
    symmetrize(track.P);
    check_psd(track.P, "correct_step");
    repair_shape(track.x);
    merge_contributor(track.contributors, m.source_agent);
    ++track.n_measurements;
  }
  track.last_update = now;
  return track;
}

SpatialIndex::SpatialIndex(std::vector<GaussianObstacle> obstacles) : obstacles_(std::move(obstacles)) {
  std::vector<Vec2> means;
  means.reserve(obstacles_.size());
  for (const auto& o : obstacles_) means.push_back(o.mean);
  tree_ = KdTree2(means);
}

std::vector<KdTree2::Hit> SpatialIndex::query(Vec2 position, double radius) const {
  return tree_.radius_search(position, radius);
}

std::vector<GaussianObstacle> gather_measurements(const SpatialIndex& index, Vec2 position,
                                                  const PipelineConfig& cfg) {
  std::vector<GaussianObstacle> out;
  for (const auto& hit : index.query(position, cfg.assoc_radius)) out.push_back(index.obstacles()[hit.index]);
  return out;
}

std::vector<FusionTrack> fuse_frame(std::vector<FusionTrack> tracks,
                                    const std::vector<GaussianObstacle>& cleared, double now,
                                    const PipelineConfig& cfg, TrackId& next_id, FrameStats* stats) {
  std::sort(tracks.begin(), tracks.end(),
            [](const FusionTrack& a, const FusionTrack& b) { return a.track_id < b.track_id; });
  for (auto& t : tracks) t = predict_step(rereference(std::move(t), now), now, cfg);

  const SpatialIndex index(cleared);

  // Claim table: estimate index -> (distance, track slot). Nearest track wins, ties to the
  // lower id, which is the earlier slot after sorting.
  constexpr std::size_t kUnclaimed = std::numeric_limits<std::size_t>::max();
  std::vector<std::pair<double, std::size_t>> claim(cleared.size(), {std::numeric_limits<double>::infinity(), kUnclaimed});
  std::vector<std::vector<KdTree2::Hit>> candidates(tracks.size());
  for (std::size_t slot = 0; slot < tracks.size(); ++slot) {
    candidates[slot] = index.query(tracks[slot].position(), cfg.assoc_radius);
    for (const auto& hit : candidates[slot]) {
      auto& c = claim[hit.index];
      if (hit.distance < c.first) c = {hit.distance, slot};
    }
  }

  FrameStats local;
  for (std::size_t slot = 0; slot < tracks.size(); ++slot) {
    std::vector<GaussianObstacle> mine;
    for (const auto& hit : candidates[slot]) {
      if (claim[hit.index].second == slot) mine.push_back(cleared[hit.index]);
    }
    if (mine.empty()) continue;
    local.corrections += mine.size();
    tracks[slot] = correct_step(std::move(tracks[slot]), mine, now, cfg);
  }

  for (std::size_t j = 0; j < cleared.size(); ++j) {
    if (claim[j].second != kUnclaimed) continue;
    tracks.push_back(init_track(cleared[j], now, cfg, next_id++));
    ++local.spawned;
  }
  if (stats) *stats = local;
  return tracks;
}

}  // namespace occpred
