#pragma once

// Declarative external-field descriptions and their deterministic realization
// on a finite ball. Draws are keyed by (seed, vertex serialization) so a
// realization does not depend on ball depth or enumeration order.

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "potts/freetree.hpp"
#include "potts/model.hpp"
#include "potts/rng.hpp"

namespace potts {

enum class FieldKind { ConstantReduced, PerVertex, IidDiscrete, IidUniform01, DuplicatedRoot };

struct FieldAtom {
    std::vector<double> xi;  // full q-vector
    double p = 0.0;
};

struct FieldSpec {
    FieldKind kind = FieldKind::ConstantReduced;
    std::vector<double> xi_reduced;                    // constant_reduced
    std::map<std::string, std::vector<double>> values; // per_vertex, reduced
    std::vector<FieldAtom> atoms;                      // iid_discrete / duplicated_root

    static FieldSpec constant(std::vector<double> xi) {
        FieldSpec s;
        s.kind = FieldKind::ConstantReduced;
        s.xi_reduced = std::move(xi);
        return s;
    }
    /// The coordinate-oriented field (alpha, 0, ..., 0).
    static FieldSpec constant_alpha(double alpha, int q) {
        std::vector<double> xi(q - 1, 0.0);
        xi[0] = alpha;
        return constant(xi);
    }
    static FieldSpec iid_discrete(std::vector<FieldAtom> atoms) {
        FieldSpec s;
        s.kind = FieldKind::IidDiscrete;
        s.atoms = std::move(atoms);
        s.validate_atoms();
        return s;
    }
    static FieldSpec iid_uniform01() {
        FieldSpec s;
        s.kind = FieldKind::IidUniform01;
        return s;
    }
    static FieldSpec duplicated_root(std::vector<FieldAtom> atoms) {
        FieldSpec s;
        s.kind = FieldKind::DuplicatedRoot;
        s.atoms = std::move(atoms);
        s.validate_atoms();
        return s;
    }
    /// The +-1-coordinate field: q i.i.d. coordinates, each +-1 w.p. 1/2,
    /// expressed as 2^q explicit atoms.
    static FieldSpec iid_pm1(int q) {
        std::vector<FieldAtom> atoms;
        const double p = std::pow(0.5, q);
        for (int mask = 0; mask < (1 << q); ++mask) {
            FieldAtom a;
            a.p = p;
            for (int i = 0; i < q; ++i) a.xi.push_back((mask >> i) & 1 ? 1.0 : -1.0);
            atoms.push_back(std::move(a));
        }
        return iid_discrete(std::move(atoms));
    }

    void validate_atoms() const {
        if (atoms.empty()) throw std::invalid_argument("FieldSpec: no atoms");
        double s = 0.0;
        std::size_t q = atoms[0].xi.size();
        for (const auto& a : atoms) {
            if (a.xi.size() != q) throw std::invalid_argument("FieldSpec: atom dimension mismatch");
            if (a.p < 0.0) throw std::invalid_argument("FieldSpec: negative atom probability");
            s += a.p;
        }
        if (std::fabs(s - 1.0) > 1e-12)
            throw std::invalid_argument("FieldSpec: atom probabilities must sum to 1");
    }
};

inline FieldSpec field_spec_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    FieldSpec s;
    if (type == "constant") {
        s.kind = FieldKind::ConstantReduced;
        s.xi_reduced = j.at("xi_reduced").get<std::vector<double>>();
    } else if (type == "per_vertex") {
        s.kind = FieldKind::PerVertex;
        for (auto& [key, val] : j.at("values").items())
            s.values[key] = val.get<std::vector<double>>();
    } else if (type == "iid_discrete" || type == "duplicated_root") {
        s.kind = type == "iid_discrete" ? FieldKind::IidDiscrete : FieldKind::DuplicatedRoot;
        for (const auto& ja : j.at("atoms")) {
            FieldAtom a;
            a.xi = ja.at("xi").get<std::vector<double>>();
            a.p = ja.at("p").get<double>();
            s.atoms.push_back(std::move(a));
        }
        s.validate_atoms();
    } else if (type == "iid_uniform01") {
        s.kind = FieldKind::IidUniform01;
    } else {
        throw std::invalid_argument("FieldSpec: unknown type \"" + type + "\"");
    }
    return s;
}

inline nlohmann::json field_spec_to_json(const FieldSpec& s) {
    nlohmann::json j;
    switch (s.kind) {
        case FieldKind::ConstantReduced:
            j["type"] = "constant";
            j["xi_reduced"] = s.xi_reduced;
            break;
        case FieldKind::PerVertex:
            j["type"] = "per_vertex";
            j["values"] = nlohmann::json::object();
            for (const auto& [key, val] : s.values) j["values"][key] = val;
            break;
        case FieldKind::IidDiscrete:
        case FieldKind::DuplicatedRoot:
            j["type"] = s.kind == FieldKind::IidDiscrete ? "iid_discrete" : "duplicated_root";
            j["atoms"] = nlohmann::json::array();
            for (const auto& a : s.atoms) j["atoms"].push_back({{"xi", a.xi}, {"p", a.p}});
            break;
        case FieldKind::IidUniform01:
            j["type"] = "iid_uniform01";
            break;
    }
    return j;
}

namespace detail {

inline std::vector<double> draw_atom_reduced(const std::vector<FieldAtom>& atoms, double u) {
    double acc = 0.0;
    for (const auto& a : atoms) {
        acc += a.p;
        if (u < acc) return reduce_full(a.xi, static_cast<int>(a.xi.size()));
    }
    return reduce_full(atoms.back().xi, static_cast<int>(atoms.back().xi.size()));
}

}  // namespace detail

/// Deterministic per-vertex realization (unscaled, standard ell=q reduction).
inline FieldRealization realize_field(const FieldSpec& spec, const Ball& ball, int q,
                                      std::uint64_t seed) {
    FieldRealization xi(ball.size());
    switch (spec.kind) {
        case FieldKind::ConstantReduced: {
            if (static_cast<int>(spec.xi_reduced.size()) != q - 1)
                throw std::invalid_argument("realize_field: xi_reduced must have q-1 entries");
            for (auto& v : xi) v = spec.xi_reduced;
            break;
        }
        case FieldKind::PerVertex: {
            for (std::size_t x = 0; x < ball.size(); ++x) {
                auto it = spec.values.find(to_string(ball.word(x)));
                if (it == spec.values.end())
                    throw std::invalid_argument("realize_field: per_vertex spec missing vertex " +
                                                to_string(ball.word(x)));
                if (static_cast<int>(it->second.size()) != q - 1)
                    throw std::invalid_argument("realize_field: per_vertex entry has wrong size");
                xi[x] = it->second;
            }
            break;
        }
        case FieldKind::IidDiscrete: {
            if (static_cast<int>(spec.atoms[0].xi.size()) != q)
                throw std::invalid_argument("realize_field: atoms must be full q-vectors");
            for (std::size_t x = 0; x < ball.size(); ++x) {
                CounterRng rng(seed, to_string(ball.word(x)));
                xi[x] = detail::draw_atom_reduced(spec.atoms, rng.next_unit());
            }
            break;
        }
        case FieldKind::IidUniform01: {
            for (std::size_t x = 0; x < ball.size(); ++x) {
                CounterRng rng(seed, to_string(ball.word(x)));
                std::vector<double> full(q);
                for (int i = 0; i < q; ++i) full[i] = rng.next_unit();
                xi[x] = reduce_full(full, q);
            }
            break;
        }
        case FieldKind::DuplicatedRoot: {
            if (static_cast<int>(spec.atoms[0].xi.size()) != q)
                throw std::invalid_argument("realize_field: atoms must be full q-vectors");
            CounterRng rng(seed, "e");
            std::vector<double> v = detail::draw_atom_reduced(spec.atoms, rng.next_unit());
            for (auto& entry : xi) entry = v;
            break;
        }
    }
    return xi;
}

}  // namespace potts
