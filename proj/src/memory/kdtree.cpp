#include "mamppi/memory/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace mamppi {

namespace {
constexpr int kLeafSize = 8;
}

void KdTree::clear() {
    dim_ = 0;
    coords_.clear();
    ids_.clear();
    nodes_.clear();
}

void KdTree::build(const std::vector<Vec>& points, const std::vector<int>& ids) {
    clear();
    require(points.size() == ids.size(), "KdTree: points/ids size mismatch");
    if (points.empty()) {
        return;
    }
    dim_ = static_cast<int>(points.front().size());
    coords_.resize(points.size() * static_cast<std::size_t>(dim_));
    ids_ = ids;
    for (std::size_t i = 0; i < points.size(); ++i) {
        require(points[i].size() == dim_, "KdTree: inconsistent point dimension");
        std::copy_n(points[i].data(), dim_, coords_.data() + i * static_cast<std::size_t>(dim_));
    }
    nodes_.reserve(2 * points.size() / kLeafSize + 4);
    build_node(0, static_cast<int>(points.size()), 0);
}

int KdTree::build_node(int begin, int end, int depth) {
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    if (end - begin <= kLeafSize) {
        nodes_[static_cast<std::size_t>(index)].begin = begin;
        nodes_[static_cast<std::size_t>(index)].end = end;
        return index;
    }

    // Split on the dimension with the largest spread over this range.
    int split_dim = 0;
    double best_spread = -1.0;
    for (int d = 0; d < dim_; ++d) {
        double lo = coords_[static_cast<std::size_t>(begin) * dim_ + d];
        double hi = lo;
        for (int i = begin + 1; i < end; ++i) {
            const double v = coords_[static_cast<std::size_t>(i) * dim_ + d];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            split_dim = d;
        }
    }

    const int mid = begin + (end - begin) / 2;
    std::vector<int> order(static_cast<std::size_t>(end - begin));
    std::iota(order.begin(), order.end(), begin);
    std::nth_element(order.begin(), order.begin() + (mid - begin), order.end(),
                     [&](int a, int b) {
                         return coords_[static_cast<std::size_t>(a) * dim_ + split_dim] <
                                coords_[static_cast<std::size_t>(b) * dim_ + split_dim];
                     });
    // Apply the permutation to coords_ and ids_ over [begin, end).
    std::vector<double> tmp_coords(static_cast<std::size_t>(end - begin) *
                                   static_cast<std::size_t>(dim_));
    std::vector<int> tmp_ids(static_cast<std::size_t>(end - begin));
    for (std::size_t i = 0; i < order.size(); ++i) {
        std::copy_n(coords_.data() + static_cast<std::size_t>(order[i]) * dim_, dim_,
                    tmp_coords.data() + i * static_cast<std::size_t>(dim_));
        tmp_ids[i] = ids_[static_cast<std::size_t>(order[i])];
    }
    std::copy(tmp_coords.begin(), tmp_coords.end(),
              coords_.begin() + static_cast<std::size_t>(begin) * dim_);
    std::copy(tmp_ids.begin(), tmp_ids.end(), ids_.begin() + begin);

    const double split_value = coords_[static_cast<std::size_t>(mid) * dim_ + split_dim];
    const int left = build_node(begin, mid, depth + 1);
    const int right = build_node(mid, end, depth + 1);
    Node& node = nodes_[static_cast<std::size_t>(index)];
    node.dim = split_dim;
    node.split = split_value;
    node.left = left;
    node.right = right;
    return index;
}

}  // namespace mamppi
