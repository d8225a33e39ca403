#pragma once

// The Cayley tree of degree k as the free product of k+1 order-2 generators:
// vertices are the reduced words themselves, the root is the empty word, and
// left multiplication acts as a graph automorphism.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace potts {

constexpr std::size_t kMaxWordLength = 64;

struct GroupWord {
    std::vector<std::uint8_t> letters;  // generator indices in 1..k+1, reduced
    std::uint8_t k = 2;                 // tree degree; k+1 generators

    bool is_root() const { return letters.empty(); }
    std::size_t length() const { return letters.size(); }

    bool operator==(const GroupWord& o) const { return k == o.k && letters == o.letters; }
};

inline GroupWord root_word(int k) {
    GroupWord w;
    w.k = static_cast<std::uint8_t>(k);
    return w;
}

/// Parses "e" or dot-separated generator indices, e.g. "1.2.3".
inline GroupWord parse_word(const std::string& s, int k) {
    GroupWord w = root_word(k);
    if (s == "e" || s.empty()) return w;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t dot = s.find('.', pos);
        if (dot == std::string::npos) dot = s.size();
        int g = std::stoi(s.substr(pos, dot - pos));
        if (g < 1 || g > k + 1) throw std::invalid_argument("parse_word: generator out of range");
        if (!w.letters.empty() && w.letters.back() == g)
            throw std::invalid_argument("parse_word: word not reduced");
        w.letters.push_back(static_cast<std::uint8_t>(g));
        pos = dot + 1;
    }
    return w;
}

inline std::string to_string(const GroupWord& w) {
    if (w.is_root()) return "e";
    std::string s;
    for (std::size_t i = 0; i < w.letters.size(); ++i) {
        if (i) s += '.';
        s += std::to_string(static_cast<int>(w.letters[i]));
    }
    return s;
}

/// Reduced product a*b; every generator is an involution, so reduction just
/// cancels equal adjacent letters at the seam.
inline GroupWord multiply(const GroupWord& a, const GroupWord& b) {
    if (a.k != b.k) throw std::invalid_argument("multiply: words over different trees");
    GroupWord r = a;
    for (std::uint8_t g : b.letters) {
        if (!r.letters.empty() && r.letters.back() == g)
            r.letters.pop_back();
        else
            r.letters.push_back(g);
    }
    if (r.letters.size() > kMaxWordLength)
        throw std::length_error("multiply: word longer than 64 letters");
    return r;
}

inline GroupWord inverse(const GroupWord& a) {
    GroupWord r = a;
    for (std::size_t i = 0, j = r.letters.size(); i + 1 < j; ++i, --j)
        std::swap(r.letters[i], r.letters[j - 1]);
    return r;
}

/// Conjugate translation: with vertices identified with reduced words, the
/// left shift by z. Maps edges to edges.
inline GroupWord translate(const GroupWord& z, const GroupWord& x) { return multiply(z, x); }

/// Graph distance d(x, y) = |x^{-1} y|.
inline std::size_t distance(const GroupWord& x, const GroupWord& y) {
    return multiply(inverse(x), y).length();
}

/// Direct successors: all k+1 one-letter extensions at the root, otherwise
/// the k extensions that do not repeat the last letter.
inline std::vector<GroupWord> successors(const GroupWord& x) {
    std::vector<GroupWord> out;
    out.reserve(x.k + 1);
    for (int g = 1; g <= x.k + 1; ++g) {
        if (!x.letters.empty() && x.letters.back() == g) continue;
        GroupWord y = x;
        y.letters.push_back(static_cast<std::uint8_t>(g));
        out.push_back(std::move(y));
    }
    return out;
}

struct WordHash {
    std::size_t operator()(const GroupWord& w) const {
        std::uint64_t h = 1469598103934665603ull ^ w.k;
        for (std::uint8_t c : w.letters) {
            h ^= c;
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

inline std::uint64_t sphere_size(int k, int n) {
    if (n == 0) return 1;
    std::uint64_t s = static_cast<std::uint64_t>(k) + 1;
    for (int j = 1; j < n; ++j) s *= static_cast<std::uint64_t>(k);
    return s;
}

inline std::uint64_t ball_size(int k, int n) {
    std::uint64_t total = 1;
    for (int j = 1; j <= n; ++j) total += sphere_size(k, j);
    return total;
}

// Finite ball V_n in breadth-first order with generator indices ascending.
// Children of a vertex are contiguous, so per-vertex successor sets are
// index ranges; vertex 0 is the root and V_{n-1} is always a prefix.
class Ball {
public:
    Ball(int k, int depth, std::uint64_t vertex_budget = 5'000'000)
        : k_(k), depth_(depth) {
        if (k < 2) throw std::invalid_argument("Ball: k must be >= 2");
        if (depth < 0) throw std::invalid_argument("Ball: negative depth");
        std::uint64_t total = ball_size(k, depth);
        if (total > vertex_budget)
            throw std::runtime_error("Ball: |V_n| = " + std::to_string(total) +
                                     " exceeds vertex budget " + std::to_string(vertex_budget));
        std::size_t n = static_cast<std::size_t>(total);
        vertices_.reserve(n);
        parent_.reserve(n);
        depth_of_.reserve(n);
        child_first_.assign(n, 0);
        child_last_.assign(n, 0);
        sphere_begin_.assign(depth + 2, 0);

        vertices_.push_back(root_word(k));
        parent_.push_back(-1);
        depth_of_.push_back(0);
        index_.emplace(vertices_[0], 0);
        sphere_begin_[1] = 1;
        std::size_t scan = 0;
        for (int d = 1; d <= depth; ++d) {
            std::size_t level_end = vertices_.size();
            for (; scan < level_end; ++scan) {
                child_first_[scan] = static_cast<std::int64_t>(vertices_.size());
                for (auto& y : successors(vertices_[scan])) {
                    parent_.push_back(static_cast<std::int32_t>(scan));
                    depth_of_.push_back(static_cast<std::int16_t>(d));
                    index_.emplace(y, static_cast<std::int32_t>(vertices_.size()));
                    vertices_.push_back(std::move(y));
                }
                child_last_[scan] = static_cast<std::int64_t>(vertices_.size());
            }
            sphere_begin_[d + 1] = static_cast<std::int64_t>(vertices_.size());
        }
        for (; scan < vertices_.size(); ++scan) {
            child_first_[scan] = child_last_[scan] = static_cast<std::int64_t>(vertices_.size());
        }
    }

    int k() const { return k_; }
    int depth() const { return depth_; }
    std::size_t size() const { return vertices_.size(); }
    const GroupWord& word(std::size_t i) const { return vertices_[i]; }

    int vertex_depth(std::size_t i) const { return depth_of_[i]; }
    std::int32_t parent(std::size_t i) const { return parent_[i]; }
    bool is_leaf(std::size_t i) const { return depth_of_[i] == depth_; }

    /// Children index range [first, last) of vertex i; empty for leaves.
    std::pair<std::int64_t, std::int64_t> children(std::size_t i) const {
        return {child_first_[i], child_last_[i]};
    }

    /// First/last+1 vertex index of sphere W_d.
    std::int64_t sphere_begin(int d) const { return sphere_begin_[d]; }
    std::int64_t sphere_end(int d) const { return sphere_begin_[d + 1]; }

    /// Vertices of V_{n-1}; these are the ones with successors in the ball.
    /// A depth-0 ball has no interior.
    std::int64_t interior_size() const {
        return depth_ == 0 ? 0 : sphere_begin_[depth_];
    }

    /// Index of a word, or -1 when outside the ball.
    std::int32_t find(const GroupWord& w) const {
        auto it = index_.find(w);
        return it == index_.end() ? -1 : it->second;
    }

private:
    int k_, depth_;
    std::vector<GroupWord> vertices_;
    std::vector<std::int32_t> parent_;
    std::vector<std::int16_t> depth_of_;
    std::vector<std::int64_t> child_first_, child_last_;
    std::vector<std::int64_t> sphere_begin_;
    std::unordered_map<GroupWord, std::int32_t, WordHash> index_;
};

}  // namespace potts
