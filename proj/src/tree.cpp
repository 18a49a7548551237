#include "tvwb/tree.hpp"

#include <algorithm>
#include <cmath>

#include "tvwb/caps.hpp"
#include "tvwb/rng.hpp"

namespace tvwb {

TreeIndex::TreeIndex(int arity, int height) : s_(arity), n_(height) {
    if (arity < 1) fail(ErrorKind::invalid_input, "tree arity must be >= 1");
    if (height < 1) fail(ErrorKind::invalid_input, "tree height must be >= 1");
    const std::uint64_t cap = current_caps().tree_nodes;
    pow_.assign(n_ + 1, 1);
    offsets_.assign(n_ + 2, 0);
    offsets_[0] = 0;
    offsets_[1] = 1;
    for (int k = 1; k <= n_; ++k) {
        pow_[k] = pow_[k - 1] * s_;
        offsets_[k + 1] = offsets_[k] + pow_[k];
        if (offsets_[k + 1] > static_cast<std::int64_t>(cap))
            fail(ErrorKind::too_large,
                 "tree with arity " + std::to_string(s_) + " and height " + std::to_string(n_) +
                     " exceeds the node cap of " + std::to_string(cap));
    }
}

int TreeIndex::depth_of(std::int64_t id) const {
    int lo = 0, hi = n_;
    while (lo < hi) {
        int mid = (lo + hi + 1) / 2;
        if (offsets_[mid] <= id) lo = mid; else hi = mid - 1;
    }
    return lo;
}

std::int64_t TreeIndex::child(std::int64_t id, int symbol) const {
    int k = depth_of(id);
    std::int64_t rank = id - offsets_[k];
    return offsets_[k + 1] + static_cast<std::int64_t>(symbol - 1) * pow_[k] + rank;
}

std::int64_t TreeIndex::sigma(std::int64_t id) const {
    if (id == 0) fail(ErrorKind::invalid_input, "sigma of the root is undefined");
    int k = depth_of(id);
    std::int64_t rank = id - offsets_[k];
    return offsets_[k - 1] + rank % pow_[k - 1];
}

int TreeIndex::leading_symbol(std::int64_t id) const {
    int k = depth_of(id);
    std::int64_t rank = id - offsets_[k];
    return static_cast<int>(rank / pow_[k - 1]) + 1;
}

std::vector<int> TreeIndex::symbols_of(std::int64_t id) const {
    int k = depth_of(id);
    std::int64_t rank = id - offsets_[k];
    std::vector<int> out(k);
    for (int i = 0; i < k; ++i) {
        out[i] = static_cast<int>(rank / pow_[k - 1 - i]) + 1;
        rank %= pow_[k - 1 - i];
    }
    return out;
}

std::int64_t TreeIndex::id_of(const std::vector<int>& symbols) const {
    int k = static_cast<int>(symbols.size());
    if (k == 0) return 0;
    if (k > n_) fail(ErrorKind::invalid_input, "node longer than the tree height");
    std::int64_t rank = 0;
    for (int i = 0; i < k; ++i) {
        if (symbols[i] < 1 || symbols[i] > s_)
            fail(ErrorKind::invalid_input, "node symbol out of range");
        rank += static_cast<std::int64_t>(symbols[i] - 1) * pow_[k - 1 - i];
    }
    return offsets_[k] + rank;
}

std::string TreeIndex::node_label(std::int64_t id) const {
    if (id == 0) return "()";
    auto syms = symbols_of(id);
    std::string out;
    for (std::size_t i = 0; i < syms.size(); ++i) {
        if (i) out.push_back('.');
        out += std::to_string(syms[i]);
    }
    return out;
}

double weight(const ProbVector& p, const std::vector<int>& symbols) {
    double w = 1.0;
    for (int a : symbols) {
        if (a < 1 || a > p.size())
            fail(ErrorKind::invalid_input, "node symbol " + std::to_string(a) +
                                               " outside 1.." + std::to_string(p.size()));
        w *= p.component(a);
    }
    return w;
}

double weight(const ProbVector& p, const TreeIndex& idx, std::int64_t id) {
    double w = 1.0;
    while (id != 0) {
        w *= p.component(idx.leading_symbol(id));
        id = idx.sigma(id);
    }
    return w;
}

double circle_distance(double a, double b) {
    double d = std::abs(a - b);
    return std::min(d, 1.0 - d);
}

double label_distance(LabelKind kind, const Label& a, const Label& b) {
    if (kind == LabelKind::discrete)
        return (a.sym != b.sym || a.aux != b.aux) ? 1.0 : 0.0;
    double disc = (a.sym != b.sym) ? 1.0 : 0.0;
    return 0.5 * disc + 0.5 * circle_distance(a.fiber, b.fiber);
}

TreeName::TreeName(const ProbVector& p, int height, LabelKind kind)
    : idx_(p.size(), height), p_(p), kind_(kind), labels_(idx_.node_count()) {}

TreeName TreeName::truncated(int new_height) const {
    if (new_height < 1 || new_height > height())
        fail(ErrorKind::invalid_input, "truncation height out of range");
    TreeName out(p_, new_height, kind_);
    std::copy(labels_.begin(), labels_.begin() + out.idx_.node_count(),
              out.labels_.begin());
    return out;
}

TreeAutomorphism::TreeAutomorphism(const ProbVector& p, int height)
    : idx_(p.size(), height), p_(p) {
    std::vector<std::uint8_t> id_perm(p.size());
    for (int b = 1; b <= p.size(); ++b) id_perm[b - 1] = static_cast<std::uint8_t>(b);
    perms_.assign(idx_.internal_count(), id_perm);
}

void TreeAutomorphism::set_perm(std::int64_t node_id, const std::vector<std::uint8_t>& images) {
    for (int b = 1; b <= p_.size(); ++b)
        if (p_.class_of(images[b - 1]) != p_.class_of(b))
            fail(ErrorKind::invalid_input, "child permutation moves a symbol across weight classes");
    perms_[node_id] = images;
}

std::vector<std::int64_t> TreeAutomorphism::node_images() const {
    std::vector<std::int64_t> img(idx_.node_count());
    img[0] = 0;
    for (std::int64_t u = 0; u < idx_.internal_count(); ++u)
        for (int b = 1; b <= p_.size(); ++b)
            img[idx_.child(u, b)] = idx_.child(img[u], perms_[u][b - 1]);
    return img;
}

TreeAutomorphism TreeAutomorphism::from_node_images(const ProbVector& p, int height,
                                                    const std::vector<std::int64_t>& images) {
    TreeAutomorphism out(p, height);
    for (std::int64_t u = 0; u < out.idx_.internal_count(); ++u) {
        std::vector<std::uint8_t> perm(p.size());
        for (int b = 1; b <= p.size(); ++b)
            perm[b - 1] = static_cast<std::uint8_t>(
                out.idx_.leading_symbol(images[out.idx_.child(u, b)]));
        out.set_perm(u, perm);
    }
    return out;
}

TreeAutomorphism TreeAutomorphism::inverse() const {
    auto img = node_images();
    std::vector<std::int64_t> inv(img.size());
    for (std::size_t v = 0; v < img.size(); ++v) inv[img[v]] = static_cast<std::int64_t>(v);
    return from_node_images(p_, height(), inv);
}

TreeAutomorphism TreeAutomorphism::after(const TreeAutomorphism& inner) const {
    if (!(idx_ == inner.idx_))
        fail(ErrorKind::mismatch, "composing automorphisms of different shapes");
    auto a = node_images();
    auto b = inner.node_images();
    std::vector<std::int64_t> comp(a.size());
    for (std::size_t v = 0; v < a.size(); ++v) comp[v] = a[b[v]];
    return from_node_images(p_, height(), comp);
}

bool TreeAutomorphism::is_identity() const {
    for (const auto& perm : perms_)
        for (int b = 1; b <= p_.size(); ++b)
            if (perm[b - 1] != b) return false;
    return true;
}

std::vector<std::vector<std::uint8_t>> class_preserving_perms(const ProbVector& p) {
    int s = p.size();
    std::vector<std::vector<std::uint8_t>> out;
    std::vector<std::uint8_t> cur(s, 0);
    std::vector<bool> used(s + 1, false);
    // backtrack over symbols in order: yields lexicographic image tuples
    auto rec = [&](auto&& self, int sym) -> void {
        if (sym > s) {
            out.push_back(cur);
            return;
        }
        for (int img : p.class_symbols(p.class_of(sym))) {
            if (used[img]) continue;
            used[img] = true;
            cur[sym - 1] = static_cast<std::uint8_t>(img);
            self(self, sym + 1);
            used[img] = false;
        }
    };
    rec(rec, 1);
    return out;
}

std::vector<TreeAutomorphism> enumerate_automorphisms(const ProbVector& p, int height) {
    auto perms = class_preserving_perms(p);
    TreeIndex idx(p.size(), height);
    const std::int64_t internal = idx.internal_count();
    const std::uint64_t cap = current_caps().automorphisms;

    // count = |perms|^internal, with early exit once past the cap
    std::uint64_t per_node = perms.size();
    bool over = false;
    std::uint64_t count = 1;
    for (std::int64_t i = 0; i < internal && !over; ++i) {
        if (per_node != 0 && count > cap / per_node + 1) { over = true; break; }
        count *= per_node;
        if (count > cap) over = true;
    }
    if (over)
        fail(ErrorKind::too_large,
             "automorphism group order " + std::to_string(per_node) + "^" +
                 std::to_string(internal) + " exceeds the cap of " + std::to_string(cap));

    std::vector<TreeAutomorphism> out;
    out.reserve(count);
    std::vector<std::size_t> odo(internal, 0);
    while (true) {
        TreeAutomorphism a(p, height);
        for (std::int64_t u = 0; u < internal; ++u) a.set_perm(u, perms[odo[u]]);
        out.push_back(std::move(a));
        // increment odometer, last node fastest (node 0 is most significant)
        std::int64_t pos = internal - 1;
        while (pos >= 0) {
            if (++odo[pos] < perms.size()) break;
            odo[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
    }
    return out;
}

TreeName apply_automorphism(const TreeAutomorphism& a, const TreeName& t) {
    if (a.height() != t.height())
        fail(ErrorKind::mismatch, "automorphism and tree name heights differ");
    if (!a.p().same_as(t.p()))
        fail(ErrorKind::mismatch, "automorphism and tree name probability vectors differ");
    auto img = a.node_images();
    TreeName out(t.p(), t.height(), t.kind());
    for (std::int64_t v = 1; v < t.index().node_count(); ++v)
        out.label(v) = t.label(img[v]);
    return out;
}

TreeName random_tree_name(const ProbVector& p, int height, int alphabet_size,
                          std::uint64_t seed) {
    if (alphabet_size < 1) fail(ErrorKind::invalid_input, "alphabet size must be >= 1");
    TreeName out(p, height, LabelKind::discrete);
    Rng rng(derive_seed(seed, stream::tree_labels, 0));
    for (std::int64_t v = 1; v < out.index().node_count(); ++v)
        out.label(v).sym = static_cast<std::int32_t>(rng.next_below(alphabet_size)) + 1;
    return out;
}

} // namespace tvwb
