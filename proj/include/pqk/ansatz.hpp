// Circuit geometry and construction: brickwork layout, Haar-block and
// data-re-uploading block realizations, light-cone computation.

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "pqk/haar.hpp"
#include "pqk/qstate.hpp"
#include "pqk/rng.hpp"

namespace pqk {

enum class BlockKind { HaarBlock, ReuploadBlock };

struct AlaSpec {
    int n = 0;   // total qubits
    int m = 0;   // block width
    int L = 0;   // layers
    BlockKind kind = BlockKind::HaarBlock;

    AlaSpec() = default;
    AlaSpec(int n_, int m_, int L_, BlockKind kind_) : n(n_), m(m_), L(L_), kind(kind_) {
        if (n < 1 || m < 1 || L < 1 || m > n)
            throw std::invalid_argument("AlaSpec: need 1 <= m <= n, L >= 1");
        if (L > 1 && m % 2 != 0)
            throw std::invalid_argument("AlaSpec: m must be even when L > 1");
        if (kind == BlockKind::HaarBlock) {
            if (n % m != 0)
                throw std::invalid_argument("AlaSpec: HaarBlock requires n = m * zeta");
        } else {
            // The re-uploading block is defined for m = 2 only. Odd n is
            // allowed to match the numerical protocol (edge qubit idles in
            // odd layers).
            if (m != 2)
                throw std::invalid_argument("AlaSpec: ReuploadBlock requires m = 2");
        }
    }
};

struct BlockSite {
    int l = 0;  // 1-based block index within the layer
    int d = 0;  // 1-based layer index
    auto operator<=>(const BlockSite&) const = default;
};

// Target-qubit lists for layer d. Odd layers tile from offset 0; even
// layers shift by m/2 and leave the edges idle.
inline std::vector<std::vector<int>> layer_layout(const AlaSpec& spec, int d) {
    if (d < 1 || d > spec.L) throw std::invalid_argument("layer_layout: invalid layer");
    const int off0 = (d % 2 == 1) ? 0 : spec.m / 2;
    std::vector<std::vector<int>> blocks;
    for (int off = off0; off + spec.m <= spec.n; off += spec.m) {
        std::vector<int> t(std::size_t(spec.m));
        for (int j = 0; j < spec.m; ++j) t[std::size_t(j)] = off + j;
        blocks.push_back(std::move(t));
    }
    return blocks;
}

inline std::vector<int> block_targets(const AlaSpec& spec, BlockSite site) {
    auto blocks = layer_layout(spec, site.d);
    if (site.l < 1 || site.l > int(blocks.size()))
        throw std::invalid_argument("block_targets: invalid block index");
    return blocks[std::size_t(site.l - 1)];
}

inline std::size_t block_count(const AlaSpec& spec) {
    std::size_t c = 0;
    for (int d = 1; d <= spec.L; ++d) c += layer_layout(spec, d).size();
    return c;
}

// Four rotation parameters per re-upload block (RY, RZ on each wire).
inline std::size_t param_count(const AlaSpec& spec) {
    return spec.kind == BlockKind::ReuploadBlock ? 4 * block_count(spec) : 0;
}

inline Matrix rotation_y(double beta) {
    Matrix r(2, 2);
    double c = std::cos(beta / 2), s = std::sin(beta / 2);
    r << c, -s, s, c;
    return r;
}

inline Matrix rotation_z(double beta) {
    Matrix r = Matrix::Zero(2, 2);
    r(0, 0) = std::exp(Complex(0, -beta / 2));
    r(1, 1) = std::exp(Complex(0, beta / 2));
    return r;
}

inline Matrix kron2(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// One re-upload block on wires (a, b): embedding sub-layer RY(x)RZ(x) per
// wire, then parameterized RY/RZ per wire, then CZ.
inline Matrix reupload_block(double xa, double xb, const double theta[4]) {
    Matrix emb_a = rotation_z(xa) * rotation_y(xa);
    Matrix emb_b = rotation_z(xb) * rotation_y(xb);
    Matrix par_a = rotation_z(theta[1]) * rotation_y(theta[0]);
    Matrix par_b = rotation_z(theta[3]) * rotation_y(theta[2]);
    Matrix cz = Matrix::Identity(4, 4);
    cz(3, 3) = -1.0;
    return cz * kron2(par_a, par_b) * kron2(emb_a, emb_b);
}

struct RealizedBlock {
    BlockSite site;
    std::vector<int> targets;
    Matrix u;
};

struct CircuitInstance {
    AlaSpec spec;
    std::vector<RealizedBlock> blocks;  // application order: layer 1 .. L
};

inline CircuitInstance build_instance(const AlaSpec& spec,
                                      const std::vector<double>& x = {},
                                      const std::vector<double>& theta = {},
                                      std::uint64_t seed = 0) {
    CircuitInstance inst;
    inst.spec = spec;
    if (spec.kind == BlockKind::ReuploadBlock) {
        if (int(x.size()) != spec.n)
            throw std::invalid_argument("build_instance: dim(x) must equal n");
        if (theta.size() != param_count(spec))
            throw std::invalid_argument("build_instance: wrong parameter count");
    }
    std::size_t pidx = 0;
    for (int d = 1; d <= spec.L; ++d) {
        auto blocks = layer_layout(spec, d);
        for (int l = 1; l <= int(blocks.size()); ++l) {
            const auto& t = blocks[std::size_t(l - 1)];
            Matrix u;
            if (spec.kind == BlockKind::HaarBlock) {
                u = sample_haar_unitary(1 << spec.m, seed,
                                        {0x626c6bULL, std::uint64_t(d), std::uint64_t(l)});
            } else {
                u = reupload_block(x[std::size_t(t[0])], x[std::size_t(t[1])],
                                   &theta[pidx]);
                pidx += 4;
            }
            inst.blocks.push_back({BlockSite{l, d}, t, std::move(u)});
        }
    }
    return inst;
}

inline Statevector apply_instance(const CircuitInstance& inst, const Statevector& init) {
    if (init.n != inst.spec.n)
        throw std::invalid_argument("apply_instance: qubit-count mismatch");
    Statevector s = init;
    for (const auto& blk : inst.blocks) s = apply_block(s, blk.u, blk.targets);
    return s;
}

// Backward-propagated causal cone of kappa. kappa must lie inside exactly
// one final-layer block; an idle edge position is a hard error.
inline std::set<BlockSite> light_cone(const AlaSpec& spec, const SubsystemMask& kappa) {
    if (kappa.n != spec.n) throw std::invalid_argument("light_cone: size mismatch");
    auto last = layer_layout(spec, spec.L);
    int owner = -1;
    for (int l = 0; l < int(last.size()); ++l) {
        const auto& t = last[std::size_t(l)];
        bool all = true, any = false;
        for (int q : kappa.kept) {
            bool in = std::find(t.begin(), t.end(), q) != t.end();
            all = all && in;
            any = any || in;
        }
        if (all) {
            owner = l + 1;
            break;
        }
        if (any)
            throw std::invalid_argument("light_cone: kappa spans two final-layer blocks");
    }
    if (owner < 0)
        throw std::invalid_argument(
            "light_cone: kappa lies in an idle edge region of the final layer");

    std::set<BlockSite> cone;
    std::set<int> support(last[std::size_t(owner - 1)].begin(),
                          last[std::size_t(owner - 1)].end());
    cone.insert(BlockSite{owner, spec.L});
    for (int d = spec.L - 1; d >= 1; --d) {
        auto blocks = layer_layout(spec, d);
        std::set<int> grown = support;
        for (int l = 1; l <= int(blocks.size()); ++l) {
            const auto& t = blocks[std::size_t(l - 1)];
            bool hit = false;
            for (int q : t)
                if (support.count(q)) hit = true;
            if (hit) {
                cone.insert(BlockSite{l, d});
                grown.insert(t.begin(), t.end());
            }
        }
        support = std::move(grown);
    }
    return cone;
}

}  // namespace pqk
