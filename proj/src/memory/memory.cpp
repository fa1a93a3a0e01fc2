#include "mamppi/memory/memory.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace mamppi {

using nlohmann::json;

void MemoryFeature::validate(double gamma_max) const {
    require(radius > 0.0, "MemoryFeature: radius must be > 0");
    require(strength > 0.0 && strength <= gamma_max, "MemoryFeature: strength out of range");
    require(kind >= 1 && kind <= 3, "MemoryFeature: kind must be 1, 2 or 3");
    if (kind == 1) {
        require(!direction.has_value(), "MemoryFeature: kind 1 must not carry a direction");
    } else {
        require(direction.has_value(), "MemoryFeature: kinds 2/3 require a direction");
        require(std::abs(direction->norm() - 1.0) <= 1e-9,
                "MemoryFeature: direction must be unit length");
    }
}

void MemoryParams::validate() const {
    require(gamma_min > 0.0 && gamma_min < gamma0 && gamma0 <= gamma_max,
            "MemoryParams: need 0 < gamma_min < gamma0 <= gamma_max");
    require(dgamma > 0.0, "MemoryParams: dgamma must be > 0");
    require(beta_decay > 0.0 && beta_decay < 1.0, "MemoryParams: beta_decay must be in (0,1)");
    require(t_threshold >= 0, "MemoryParams: t_threshold must be >= 0");
    require(theta_merge > 0.0, "MemoryParams: theta_merge must be > 0");
    require(theta_dist >= 0.0, "MemoryParams: theta_dist must be >= 0");
    require(capacity >= 1, "MemoryParams: capacity must be >= 1");
}

MemoryFeature merge_features(const MemoryFeature& a, const MemoryFeature& b, double gamma_max) {
    require(a.kind == b.kind, "merge_features: kind mismatch");
    const double ga = a.strength;
    const double gb = b.strength;
    MemoryFeature out;
    out.kind = a.kind;
    out.position = (ga * a.position + gb * b.position) / (ga + gb);
    const double gap = (a.position - b.position).norm();
    out.radius = std::max({a.radius, b.radius, gap / 2.0 + std::min(a.radius, b.radius)});
    out.strength = std::min(gamma_max, ga + gb);
    if (a.direction && b.direction) {
        Vec d = ga * (*a.direction) + gb * (*b.direction);
        const double n = d.norm();
        // Antiparallel equal-strength directions cancel; keep a's direction.
        out.direction = n > 1e-12 ? Vec(d / n) : *a.direction;
    } else if (a.direction) {
        out.direction = a.direction;
    } else if (b.direction) {
        out.direction = b.direction;
    }
    out.last_inside_step = std::max(a.last_inside_step, b.last_inside_step);
    out.created_step = std::min(a.created_step, b.created_step);
    return out;
}

MemoryStore::MemoryStore(int dim) : dim_(dim) {
    require(dim >= 1, "MemoryStore: dim must be >= 1");
}

double MemoryStore::max_radius() const {
    double r = 0.0;
    for (const auto& f : features_) {
        r = std::max(r, f.radius);
    }
    return r;
}

std::vector<ActiveFeature> MemoryStore::query_active(const Vec& x) const {
    require(x.size() == dim_, "query_active: dimension mismatch");
    std::vector<ActiveFeature> out;
    for_each_active(x, [&](int id, double dist) { out.push_back({id, dist}); });
    std::sort(out.begin(), out.end(),
              [](const ActiveFeature& a, const ActiveFeature& b) { return a.index < b.index; });
    return out;
}

void MemoryStore::note_mutation(int index) {
    if (static_cast<int>(stale_.size()) < size()) {
        stale_.resize(static_cast<std::size_t>(size()), 0);
    }
    if (stale_[static_cast<std::size_t>(index)]) {
        return;  // already routed through the overflow list
    }
    stale_[static_cast<std::size_t>(index)] = 1;
    overflow_.push_back(index);
    maybe_rebuild();
}

void MemoryStore::maybe_rebuild(bool force) {
    const int threshold = std::max<int>(16, size() / 4);
    if (force || rebuild_needed_ || static_cast<int>(overflow_.size()) > threshold) {
        rebuild_index();
    }
}

void MemoryStore::rebuild_index() {
    std::vector<Vec> points;
    std::vector<int> ids;
    points.reserve(features_.size());
    ids.reserve(features_.size());
    for (int i = 0; i < size(); ++i) {
        points.push_back(features_[static_cast<std::size_t>(i)].position);
        ids.push_back(i);
    }
    tree_.build(points, ids);
    tree_max_radius_ = max_radius();
    stale_.assign(features_.size(), 0);
    overflow_.clear();
    rebuild_needed_ = false;
}

void MemoryStore::insert(const CandidateFeature& candidate, const MemoryParams& params) {
    params.validate();
    require(candidate.position.size() == dim_, "insert: dimension mismatch");
    require(candidate.radius > 0.0, "insert: candidate radius must be > 0");
    require(candidate.kind >= 1 && candidate.kind <= 3, "insert: bad kind");

    MemoryFeature incoming;
    incoming.position = candidate.position;
    incoming.radius = candidate.radius;
    incoming.strength = params.gamma0;
    incoming.kind = candidate.kind;
    if (candidate.kind != 1) {
        require(candidate.direction.has_value(), "insert: kinds 2/3 require a direction");
        incoming.direction = *candidate.direction / candidate.direction->norm();
    }
    incoming.created_step = step_;
    incoming.last_inside_step = step_;

    // Merge takes precedence over the novelty rule.
    int best = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    double min_dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < size(); ++i) {
        const auto& f = features_[static_cast<std::size_t>(i)];
        const double dist = (incoming.position - f.position).norm();
        min_dist = std::min(min_dist, dist);
        if (f.kind == incoming.kind) {
            const double ratio = dist / f.radius;
            if (ratio < params.theta_merge && ratio < best_ratio) {
                best_ratio = ratio;
                best = i;
            }
        }
    }
    if (best >= 0) {
        features_[static_cast<std::size_t>(best)] =
            merge_features(features_[static_cast<std::size_t>(best)], incoming,
                           params.gamma_max);
        note_mutation(best);
        return;
    }
    if (size() > 0 && min_dist <= params.theta_dist) {
        return;  // too close to an existing feature of another kind
    }
    features_.push_back(std::move(incoming));
    note_mutation(size() - 1);
    if (size() > params.capacity) {
        int weakest = 0;
        for (int i = 1; i < size(); ++i) {
            if (features_[static_cast<std::size_t>(i)].strength <
                features_[static_cast<std::size_t>(weakest)].strength) {
                weakest = i;
            }
        }
        features_.erase(features_.begin() + weakest);
        force_rebuild();
    }
}

void MemoryStore::update_strengths(const Vec& x, bool stagnating, const MemoryParams& params) {
    params.validate();
    require(x.size() == dim_, "update_strengths: dimension mismatch");
    for (auto& f : features_) {
        const double dist = (x - f.position).norm();
        if (dist <= f.radius) {
            if (stagnating) {
                f.strength = std::min(params.gamma_max, f.strength + params.dgamma);
            }
            f.last_inside_step = step_;
        } else if (step_ - f.last_inside_step > params.t_threshold) {
            f.strength *= params.beta_decay;
        }
    }
}

void MemoryStore::prune(const MemoryParams& params) {
    params.validate();
    const auto old_size = features_.size();
    std::erase_if(features_, [&](const MemoryFeature& f) { return f.strength < params.gamma_min; });
    if (features_.size() != old_size) {
        force_rebuild();
    }
}

void MemoryStore::update(const Vec& x, const std::optional<CandidateFeature>& candidate,
                         bool stagnating, const MemoryParams& params) {
    update_strengths(x, stagnating, params);
    if (candidate) {
        insert(*candidate, params);
    }
    prune(params);
    ++step_;
}

void MemoryStore::set_direction(int index, const Vec& direction) {
    auto& f = features_.at(static_cast<std::size_t>(index));
    require(f.kind != 1, "set_direction: kind 1 features carry no direction");
    const double n = direction.norm();
    require(n > 1e-12, "set_direction: zero direction");
    f.direction = direction / n;
}

void MemoryStore::clear() {
    features_.clear();
    step_ = 0;
    force_rebuild();
}

namespace {

json vec_to_json(const Vec& v) {
    json arr = json::array();
    for (int i = 0; i < v.size(); ++i) {
        arr.push_back(v[i]);
    }
    return arr;
}

Vec vec_from_json(const json& arr) {
    Vec v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    }
    return v;
}

}  // namespace

std::string MemoryStore::serialize() const {
    json doc;
    doc["dim"] = dim_;
    doc["step"] = step_;
    json feats = json::array();
    for (const auto& f : features_) {
        json jf;
        jf["position"] = vec_to_json(f.position);
        jf["radius"] = f.radius;
        jf["strength"] = f.strength;
        jf["kind"] = f.kind;
        if (f.direction) {
            jf["direction"] = vec_to_json(*f.direction);
        }
        jf["last_inside_step"] = f.last_inside_step;
        jf["created_step"] = f.created_step;
        feats.push_back(std::move(jf));
    }
    doc["features"] = std::move(feats);
    return doc.dump(2);
}

MemoryStore MemoryStore::deserialize(const std::string& text) {
    const json doc = json::parse(text);
    MemoryStore store(doc.at("dim").get<int>());
    store.step_ = doc.at("step").get<long>();
    for (const auto& jf : doc.at("features")) {
        MemoryFeature f;
        f.position = vec_from_json(jf.at("position"));
        require(f.position.size() == store.dim_, "MemoryStore: bad stored dimension");
        f.radius = jf.at("radius").get<double>();
        f.strength = jf.at("strength").get<double>();
        f.kind = jf.at("kind").get<int>();
        if (jf.contains("direction")) {
            f.direction = vec_from_json(jf.at("direction"));
        }
        f.last_inside_step = jf.at("last_inside_step").get<long>();
        f.created_step = jf.at("created_step").get<long>();
        store.features_.push_back(std::move(f));
    }
    store.force_rebuild();
    return store;
}

void MemoryStore::save(const std::string& path) const {
    std::ofstream out(path);
    require(out.good(), "MemoryStore::save: cannot open file");
    out << serialize();
}

MemoryStore MemoryStore::load(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "MemoryStore::load: cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str());
}

}  // namespace mamppi
