#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tvwb/bigint.hpp"
#include "tvwb/prob_vector.hpp"

namespace tvwb {

// Truncated s-ary tree of height N. Node ids are level-major: 0 is the root,
// then the nodes of each length in lexicographic order of their symbol
// sequence. A node (a1,...,ak) has rank sum (ai-1)*s^(k-i) inside level k;
// its children prepend a symbol on the left, matching the sigma map that
// deletes the leftmost symbol.
class TreeIndex {
public:
    TreeIndex(int arity, int height);

    int arity() const { return s_; }
    int height() const { return n_; }
    std::int64_t level_begin(int depth) const { return offsets_[depth]; }
    std::int64_t level_size(int depth) const { return pow_[depth]; }
    std::int64_t node_count() const { return offsets_[n_ + 1]; }       // incl. root
    std::int64_t internal_count() const { return offsets_[n_]; }       // depth < N

    int depth_of(std::int64_t id) const;
    std::int64_t rank_of(std::int64_t id) const { return id - offsets_[depth_of(id)]; }
    std::int64_t child(std::int64_t id, int symbol) const; // symbol in 1..s
    std::int64_t sigma(std::int64_t id) const;             // delete leftmost symbol
    int leading_symbol(std::int64_t id) const;
    std::vector<int> symbols_of(std::int64_t id) const;
    std::int64_t id_of(const std::vector<int>& symbols) const;
    std::string node_label(std::int64_t id) const; // "2.1" style, root is "()"

    bool operator==(const TreeIndex& o) const { return s_ == o.s_ && n_ == o.n_; }

private:
    int s_;
    int n_;
    std::vector<std::int64_t> pow_;     // s^k
    std::vector<std::int64_t> offsets_; // first id of each level, 0..N+1
};

// Product of the p-components along a node's symbols; the root weighs 1.
double weight(const ProbVector& p, const std::vector<int>& symbols);
double weight(const ProbVector& p, const TreeIndex& idx, std::int64_t id);

enum class LabelKind { discrete, symbol_circle };

// Tree-name label: a discrete part (sym, aux) and, for skew products over the
// circle, a fiber coordinate in [0,1). The metric is the discrete metric on
// (sym, aux) pairs, or D = d_discrete/2 + d_arc/2 when a fiber is present.
struct Label {
    std::int32_t sym = 0;
    std::int32_t aux = -1;
    double fiber = 0.0;
    bool has_fiber = false;

    bool operator==(const Label& o) const {
        return sym == o.sym && aux == o.aux && has_fiber == o.has_fiber &&
               (!has_fiber || fiber == o.fiber);
    }
};

double circle_distance(double a, double b); // arc length, in [0, 1/2]
double label_distance(LabelKind kind, const Label& a, const Label& b); // diameter <= 1

class TreeName {
public:
    TreeName(const ProbVector& p, int height, LabelKind kind);

    const TreeIndex& index() const { return idx_; }
    const ProbVector& p() const { return p_; }
    int height() const { return idx_.height(); }
    LabelKind kind() const { return kind_; }

    const Label& label(std::int64_t id) const { return labels_[id]; }
    Label& label(std::int64_t id) { return labels_[id]; }

    TreeName truncated(int new_height) const;

private:
    TreeIndex idx_;
    ProbVector p_;
    LabelKind kind_;
    std::vector<Label> labels_; // indexed by node id; slot 0 (root) unused
};

// Weight-preserving bijection commuting with sigma, stored in its canonical
// factored form: one class-preserving child permutation per node of depth < N.
class TreeAutomorphism {
public:
    TreeAutomorphism(const ProbVector& p, int height); // identity

    const TreeIndex& index() const { return idx_; }
    const ProbVector& p() const { return p_; }
    int height() const { return idx_.height(); }

    int perm(std::int64_t node_id, int symbol) const { return perms_[node_id][symbol - 1]; }
    void set_perm(std::int64_t node_id, const std::vector<std::uint8_t>& images);

    // image of every node id under the induced bijection
    std::vector<std::int64_t> node_images() const;

    TreeAutomorphism inverse() const;
    TreeAutomorphism after(const TreeAutomorphism& inner) const; // this o inner

    bool is_identity() const;
    bool operator==(const TreeAutomorphism& o) const { return perms_ == o.perms_; }

    static TreeAutomorphism from_node_images(const ProbVector& p, int height,
                                             const std::vector<std::int64_t>& images);

private:
    TreeIndex idx_;
    ProbVector p_;
    std::vector<std::vector<std::uint8_t>> perms_; // [node id][symbol-1] -> image symbol
};

// All class-preserving permutations of {1..s}, lexicographic by image tuple.
std::vector<std::vector<std::uint8_t>> class_preserving_perms(const ProbVector& p);

// Exhaustive enumeration of A_N in odometer order (node-major, root most
// significant; permutations in lexicographic order). Errors out when the group
// order exceeds the configured cap.
std::vector<TreeAutomorphism> enumerate_automorphisms(const ProbVector& p, int height);

// output(v) = input(A(v))
TreeName apply_automorphism(const TreeAutomorphism& a, const TreeName& t);

// i.i.d. uniform labels over {1..alphabet_size}; deterministic per seed.
TreeName random_tree_name(const ProbVector& p, int height, int alphabet_size,
                          std::uint64_t seed);

} // namespace tvwb
