#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mamppi/detect/detect.hpp"
#include "mamppi/memory/kdtree.hpp"

namespace mamppi {

/// One stored topological feature: position, influence radius, strength,
/// kind (1 local minimum, 2 low-gradient, 3 high-curvature) and, for kinds
/// 2/3, a unit guidance direction.
struct MemoryFeature {
    Vec position;
    double radius = 0.0;
    double strength = 0.0;
    int kind = 1;
    std::optional<Vec> direction;
    long last_inside_step = 0;
    long created_step = 0;

    void validate(double gamma_max) const;
};

struct MemoryParams {
    double gamma0 = 1.0;       // strength at insertion
    double gamma_max = 5.0;    // strength cap
    double dgamma = 0.1;       // increment per stagnating step inside
    double beta_decay = 0.99;  // multiplicative decay when neglected
    long t_threshold = 100;    // steps outside before decay starts
    double gamma_min = 0.1;    // removal floor
    double theta_merge = 1.5;  // merge when |m_new - m_i| / r_i below this
    double theta_dist = 0.5;   // novelty distance for insertion
    int capacity = 100;

    void validate() const;
};

struct ActiveFeature {
    int index = -1;
    double distance = 0.0;
};

/// Merge per the consolidation rules: strength-weighted position, radius
/// max(r_a, r_b, |m_a - m_b|/2 + min(r_a, r_b)), strengths summed then
/// capped, directions strength-averaged and renormalized.
MemoryFeature merge_features(const MemoryFeature& a, const MemoryFeature& b, double gamma_max);

/// The evolving feature memory. Single writer between control steps;
/// read-only snapshots are safe to share with rollout workers.
class MemoryStore {
  public:
    explicit MemoryStore(int dim);

    int dim() const { return dim_; }
    long step_count() const { return step_; }
    int size() const { return static_cast<int>(features_.size()); }
    bool empty() const { return features_.empty(); }
    const std::vector<MemoryFeature>& features() const { return features_; }
    const MemoryFeature& feature(int i) const { return features_.at(static_cast<std::size_t>(i)); }
    double max_radius() const;

    /// Features whose influence region contains x, with distances.
    std::vector<ActiveFeature> query_active(const Vec& x) const;

    /// Visits active features without allocating: fn(index, distance).
    template <typename F>
    void for_each_active(const Vec& x, F&& fn) const {
        tree_.for_each_within(x, tree_max_radius_, [&](int id, double dist) {
            if (stale_[static_cast<std::size_t>(id)]) {
                return;
            }
            const MemoryFeature& f = features_[static_cast<std::size_t>(id)];
            if (dist <= f.radius) {
                fn(id, dist);
            }
        });
        for (const int id : overflow_) {
            const MemoryFeature& f = features_[static_cast<std::size_t>(id)];
            const double dist = (x - f.position).norm();
            if (dist <= f.radius) {
                fn(id, dist);
            }
        }
    }

    /// Merge into a nearby same-kind feature, append if sufficiently novel,
    /// drop otherwise. Capacity overflow evicts the weakest feature.
    void insert(const CandidateFeature& candidate, const MemoryParams& params);

    /// Strength growth inside + stagnating, decay after prolonged absence.
    void update_strengths(const Vec& x, bool stagnating, const MemoryParams& params);

    /// Drops features whose strength fell below gamma_min.
    void prune(const MemoryParams& params);

    /// One memory-evolution step: update_strengths, insert, prune.
    void update(const Vec& x, const std::optional<CandidateFeature>& candidate,
                bool stagnating, const MemoryParams& params);

    /// Overwrites the guidance direction of feature i (kinds 2/3 only).
    void set_direction(int index, const Vec& direction);

    void clear();

    std::string serialize() const;
    static MemoryStore deserialize(const std::string& text);
    void save(const std::string& path) const;
    static MemoryStore load(const std::string& path);

  private:
    void note_mutation(int index);
    void rebuild_index();
    void force_rebuild() { rebuild_needed_ = true; maybe_rebuild(true); }
    void maybe_rebuild(bool force = false);

    int dim_ = 0;
    long step_ = 0;
    std::vector<MemoryFeature> features_;

    // Spatial index: kd-tree over a snapshot plus a linear overflow set of
    // features mutated since the last build; rebuilt when the overflow grows
    // past max(16, |M|/4).
    KdTree tree_;
    double tree_max_radius_ = 0.0;
    std::vector<char> stale_;  // per-feature: superseded in the tree snapshot
    std::vector<int> overflow_;
    bool rebuild_needed_ = false;
};

}  // namespace mamppi
