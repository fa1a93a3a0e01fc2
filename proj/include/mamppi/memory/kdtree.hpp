#pragma once

#include <cmath>
#include <vector>

#include "mamppi/core/types.hpp"

namespace mamppi {

/// Balanced k-d tree over fixed-dimension points, built once and queried many
/// times per control step. Leaves hold small point ranges scanned linearly.
class KdTree {
  public:
    KdTree() = default;

    void clear();
    bool empty() const { return nodes_.empty(); }
    int size() const { return static_cast<int>(ids_.size()); }

    /// Builds over points[i] with external ids ids[i]. All points share dim.
    void build(const std::vector<Vec>& points, const std::vector<int>& ids);

    /// Calls fn(id, distance) for every point within radius of x.
    template <typename F>
    void for_each_within(const Vec& x, double radius, F&& fn) const {
        if (nodes_.empty()) {
            return;
        }
        const double r2 = radius * radius;
        int stack[64];
        int top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const Node& node = nodes_[static_cast<std::size_t>(stack[--top])];
            if (node.is_leaf()) {
                for (int i = node.begin; i < node.end; ++i) {
                    const double d2 = squared_distance(i, x);
                    if (d2 <= r2) {
                        fn(ids_[static_cast<std::size_t>(i)], std::sqrt(d2));
                    }
                }
                continue;
            }
            const double delta = x[node.dim] - node.split;
            const int near = delta <= 0.0 ? node.left : node.right;
            const int far = delta <= 0.0 ? node.right : node.left;
            stack[top++] = near;
            if (delta * delta <= r2) {
                stack[top++] = far;
            }
        }
    }

  private:
    struct Node {
        double split = 0.0;
        int dim = -1;
        int left = -1, right = -1;
        int begin = 0, end = 0;
        bool is_leaf() const { return left < 0; }
    };

    double squared_distance(int slot, const Vec& x) const {
        const double* p = coords_.data() + static_cast<std::size_t>(slot) * dim_;
        double acc = 0.0;
        for (int d = 0; d < dim_; ++d) {
            const double diff = p[d] - x[d];
            acc += diff * diff;
        }
        return acc;
    }

    int build_node(int begin, int end, int depth);

    int dim_ = 0;
    std::vector<double> coords_;  // size() * dim_, reordered during build
    std::vector<int> ids_;
    std::vector<Node> nodes_;
};

}  // namespace mamppi
