#ifndef OSCNET_MODEL_HPP
#define OSCNET_MODEL_HPP

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "oscnet/common.hpp"
#include "oscnet/linalg.hpp"
#include "oscnet/rotation.hpp"

namespace oscnet {

enum class Structure { COM, CNM, DIM, FREE };

inline std::string to_string(Structure s) {
  switch (s) {
    case Structure::COM: return "COM";
    case Structure::CNM: return "CNM";
    case Structure::DIM: return "DIM";
    case Structure::FREE: return "FREE";
  }
  return "?";
}

inline Structure structure_from_string(const std::string& s) {
  if (s == "COM" || s == "com") return Structure::COM;
  if (s == "CNM" || s == "cnm") return Structure::CNM;
  if (s == "DIM" || s == "dim") return Structure::DIM;
  if (s == "FREE" || s == "free") return Structure::FREE;
  throw validation_error("unknown structure tag: " + s);
}

/// One network link. Index semantics depend on the structure:
///   COM: from = oscillator index, to = node index (oscillator drives node);
///   CNM: undirected node pair (from, to);
///   DIM: directed influence of node `from` on node `to`.
/// All indices 0-based internally.
struct Edge {
  int from = 0;
  int to = 0;
  double magnitude = 0.0;
  double phase_rad = 0.0;
};

/// Complete switching state-space parameterization.
struct ModelSpec {
  Structure structure = Structure::FREE;
  int n_states = 0;  // M
  int n_osc = 0;     // K
  int n_nodes = 0;   // N
  double fs_hz = 1.0;

  std::vector<Mat> A;      // M matrices, 2K x 2K
  std::vector<Mat> Sigma;  // M matrices, 2K x 2K
  std::vector<Mat> B;      // M matrices, N x 2K
  Mat R;                   // N x N observation noise
  Mat Z;                   // M x M row-stochastic switch transition
  Vec switch_prior;        // length M, P(S_1)
  Vec mu1;                 // 2K initial mean
  Mat C1;                  // 2K x 2K initial covariance

  std::vector<OscillatorSpec> oscillators;  // K entries (empty for FREE)
  bool unstable_flag = false;  // DIM dynamics with spectral radius >= 1

  int state_dim() const { return 2 * n_osc; }

  // A and Sigma are state-independent under COM; A and B under CNM;
  // Sigma and B under DIM.
  bool shared_A() const {
    return structure == Structure::COM || structure == Structure::CNM;
  }
  bool shared_Sigma() const { return structure == Structure::COM ||
                                     structure == Structure::DIM; }
  bool shared_B() const {
    return structure == Structure::CNM || structure == Structure::DIM;
  }

  void validate() const;
};

namespace detail {

inline Eigen::Matrix2d block2(const Mat& m, int bi, int bj) {
  return m.block<2, 2>(2 * bi, 2 * bj);
}

inline double scaled_rotation_violation(const Eigen::Matrix2d& b) {
  return std::max(std::abs(b(0, 0) - b(1, 1)), std::abs(b(0, 1) + b(1, 0)));
}

inline double matrix_scale(const Mat& m) {
  return std::max(1.0, m.cwiseAbs().maxCoeff());
}

}  // namespace detail

/// Max deviation of the structured blocks of `spec` from exact
/// scaled-rotation / block-diagonal form. Zero for FREE.
inline double structure_violation(const ModelSpec& spec) {
  using detail::block2;
  using detail::scaled_rotation_violation;
  const int k = spec.n_osc;
  double worst = 0.0;
  auto chk = [&](double v) { worst = std::max(worst, v); };
  switch (spec.structure) {
    case Structure::COM:
      for (const Mat& a : spec.A)
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) {
            if (i == j)
              chk(scaled_rotation_violation(block2(a, i, i)));
            else
              chk(block2(a, i, j).cwiseAbs().maxCoeff());
          }
      for (const Mat& s : spec.Sigma) {
        Mat off = s;
        for (int i = 0; i < k; ++i) {
          chk(std::abs(s(2 * i, 2 * i) - s(2 * i + 1, 2 * i + 1)));
          chk(std::abs(s(2 * i, 2 * i + 1)));
          chk(std::abs(s(2 * i + 1, 2 * i)));
          off.block<2, 2>(2 * i, 2 * i).setZero();
        }
        chk(off.cwiseAbs().maxCoeff());
      }
      break;
    case Structure::CNM:
      for (const Mat& s : spec.Sigma) {
        chk(symmetry_violation(s));
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) {
            if (i == j) {
              chk(std::abs(s(2 * i, 2 * i) - s(2 * i + 1, 2 * i + 1)));
              chk(std::abs(s(2 * i, 2 * i + 1)));
              chk(std::abs(s(2 * i + 1, 2 * i)));
            } else {
              chk(scaled_rotation_violation(block2(s, i, j)));
            }
          }
      }
      break;
    case Structure::DIM:
      for (const Mat& a : spec.A)
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) {
            if (i == j) {
              // Diagonal block = scaled rotation minus (row sum of
              // off-diagonal amplitudes) * I; adding the row sum back must
              // recover a scaled rotation.
              double row_sum = 0.0;
              for (int l = 0; l < k; ++l)
                if (l != i)
                  row_sum += project_scaled_rotation(block2(a, i, l)).gamma;
              Eigen::Matrix2d adj =
                  block2(a, i, i) + row_sum * Eigen::Matrix2d::Identity();
              chk(scaled_rotation_violation(adj));
            } else {
              chk(scaled_rotation_violation(block2(a, i, j)));
            }
          }
      break;
    case Structure::FREE:
      break;
  }
  return worst;
}

inline void ModelSpec::validate() const {
  const int m = n_states, dim = state_dim();
  if (m < 1) throw validation_error("model: need at least one switching state");
  if (n_osc < 1) throw validation_error("model: need at least one oscillator");
  if (n_nodes < 1) throw validation_error("model: need at least one node");
  if (!(fs_hz > 0.0)) throw validation_error("model: fs must be > 0");
  if (static_cast<int>(A.size()) != m || static_cast<int>(Sigma.size()) != m ||
      static_cast<int>(B.size()) != m)
    throw validation_error("model: A, Sigma, B must each have M entries");
  for (int j = 0; j < m; ++j) {
    if (A[j].rows() != dim || A[j].cols() != dim)
      throw validation_error("model: A[" + std::to_string(j + 1) +
                             "] must be 2K x 2K");
    if (Sigma[j].rows() != dim || Sigma[j].cols() != dim)
      throw validation_error("model: Sigma[" + std::to_string(j + 1) +
                             "] must be 2K x 2K");
    if (B[j].rows() != n_nodes || B[j].cols() != dim)
      throw validation_error("model: B[" + std::to_string(j + 1) +
                             "] must be N x 2K");
  }
  if (R.rows() != n_nodes || R.cols() != n_nodes)
    throw validation_error("model: R must be N x N");
  if (Z.rows() != m || Z.cols() != m)
    throw validation_error("model: Z must be M x M");
  if (switch_prior.size() != m)
    throw validation_error("model: switch prior must have M entries");
  if (mu1.size() != dim || C1.rows() != dim || C1.cols() != dim)
    throw validation_error("model: initial condition must be 2K-dimensional");

  for (int i = 0; i < m; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < m; ++j) {
      if (Z(i, j) < -1e-12 || Z(i, j) > 1.0 + 1e-12)
        throw validation_error("model: Z(" + std::to_string(i + 1) + "," +
                               std::to_string(j + 1) + ") outside [0,1]");
      row_sum += Z(i, j);
    }
    if (std::abs(row_sum - 1.0) > 1e-12)
      throw validation_error("model: Z row " + std::to_string(i + 1) +
                             " sums to " + std::to_string(row_sum) +
                             ", must be 1 within 1e-12");
  }
  if (std::abs(switch_prior.sum() - 1.0) > 1e-10 ||
      switch_prior.minCoeff() < -1e-12)
    throw validation_error("model: switch prior must be a distribution");

  auto check_cov = [](const Mat& c, const std::string& name) {
    if (symmetry_violation(c) > 1e-10 * detail::matrix_scale(c))
      throw validation_error("model: " + name + " not symmetric within 1e-10");
    if (!is_psd(c))
      throw validation_error("model: " + name +
                             " not PSD within -1e-10*trace/dim");
  };
  for (int j = 0; j < m; ++j)
    check_cov(Sigma[j], "Sigma[" + std::to_string(j + 1) + "]");
  check_cov(R, "R");
  check_cov(C1, "C1");

  if (structure != Structure::FREE) {
    if (static_cast<int>(oscillators.size()) != n_osc)
      throw validation_error("model: need one oscillator spec per oscillator");
    for (const auto& o : oscillators) o.validate();
    if ((structure == Structure::CNM || structure == Structure::DIM) &&
        n_osc != n_nodes)
      throw validation_error("model: " + to_string(structure) +
                             " requires one oscillator per node (K = N)");
    double scale = 1.0;
    for (int j = 0; j < m; ++j)
      scale = std::max({scale, detail::matrix_scale(A[j]),
                        detail::matrix_scale(Sigma[j])});
    if (structure_violation(*this) > 1e-8 * scale)
      throw validation_error("model: " + to_string(structure) +
                             " block structure violated");
    auto same = [](const Mat& x, const Mat& y) {
      return (x - y).cwiseAbs().maxCoeff() <=
             1e-10 * std::max(detail::matrix_scale(x), detail::matrix_scale(y));
    };
    for (int j = 1; j < m; ++j) {
      if (shared_A() && !same(A[j], A[0]))
        throw validation_error("model: A must be state-independent under " +
                               to_string(structure));
      if (shared_Sigma() && !same(Sigma[j], Sigma[0]))
        throw validation_error(
            "model: Sigma must be state-independent under " +
            to_string(structure));
      if (shared_B() && !same(B[j], B[0]))
        throw validation_error("model: B must be state-independent under " +
                               to_string(structure));
    }
  }
}

/// Per-state network summary extracted from the structure-bearing parameter.
struct NetworkReport {
  struct StateNetwork {
    Mat magnitude;  // N x N (COM: N x K), nonnegative
    Mat phase;      // radians, same shape
  };
  std::vector<StateNetwork> states;
  bool directed = false;  // true only for DIM
};

/// Read magnitudes and phases back out of a ModelSpec: COM from B_j entries,
/// CNM from Sigma_j off-diagonal blocks, DIM from A_j off-diagonal blocks.
inline NetworkReport extract_network(const ModelSpec& spec) {
  NetworkReport report;
  report.directed = (spec.structure == Structure::DIM);
  const int k = spec.n_osc, n = spec.n_nodes;
  for (int j = 0; j < spec.n_states; ++j) {
    NetworkReport::StateNetwork net;
    if (spec.structure == Structure::COM) {
      net.magnitude = Mat::Zero(n, k);
      net.phase = Mat::Zero(n, k);
      for (int node = 0; node < n; ++node)
        for (int osc = 0; osc < k; ++osc) {
          const double re = spec.B[j](node, 2 * osc);
          const double im = spec.B[j](node, 2 * osc + 1);
          net.magnitude(node, osc) = std::hypot(re, im);
          net.phase(node, osc) = (re == 0.0 && im == 0.0)
                                     ? 0.0
                                     : std::atan2(im, re);
        }
    } else {
      const Mat& src = (spec.structure == Structure::DIM) ? spec.A[j]
                                                          : spec.Sigma[j];
      net.magnitude = Mat::Zero(n, n);
      net.phase = Mat::Zero(n, n);
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) {
          if (i == l) continue;
          ScaledRotation sr =
              project_scaled_rotation(detail::block2(src, i, l));
          net.magnitude(i, l) = sr.gamma;
          net.phase(i, l) = sr.psi;
        }
    }
    report.states.push_back(std::move(net));
  }
  return report;
}

/// Phase difference between two nodes driven by the same oscillator (COM).
inline double com_pair_phase(const NetworkReport& report, int state, int n1,
                             int n2, int osc) {
  const auto& net = report.states.at(state);
  return angle_diff(net.phase(n1, osc), net.phase(n2, osc));
}

/// Project a raw 2K x 2K M-step matrix onto the structure's constraint set.
/// CNM (Sigma): off-diagonal blocks -> nearest scaled rotations with blockwise
/// symmetry, diagonal blocks -> (mean of the two diagonal entries) * I; if the
/// result is indefinite, all off-diagonal blocks are shrunk by a common
/// bisection factor until it is PSD.
/// DIM (A): off-diagonal blocks projected; each diagonal block is projected
/// after adding back the row sum of off-diagonal amplitudes, which is then
/// re-subtracted.
/// COM (A): block-diagonal scaled rotations, off-diagonal blocks zeroed.
inline Mat project_structure(const Mat& raw, Structure structure) {
  const int dim = static_cast<int>(raw.rows());
  if (raw.cols() != dim || dim % 2 != 0)
    throw validation_error("project_structure: matrix must be 2K x 2K");
  const int k = dim / 2;
  Mat out = Mat::Zero(dim, dim);

  switch (structure) {
    case Structure::FREE:
      return raw;

    case Structure::COM: {
      for (int i = 0; i < k; ++i) {
        ScaledRotation sr = project_scaled_rotation(detail::block2(raw, i, i));
        out.block<2, 2>(2 * i, 2 * i) = sr.realize();
      }
      return out;
    }

    case Structure::CNM: {
      Mat diag_part = Mat::Zero(dim, dim);
      Mat off_part = Mat::Zero(dim, dim);
      for (int i = 0; i < k; ++i) {
        const double s =
            0.5 * (raw(2 * i, 2 * i) + raw(2 * i + 1, 2 * i + 1));
        diag_part.block<2, 2>(2 * i, 2 * i) =
            std::max(s, 0.0) * Eigen::Matrix2d::Identity();
      }
      for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
          Eigen::Matrix2d sym = 0.5 * (detail::block2(raw, i, j) +
                                       detail::block2(raw, j, i).transpose());
          Eigen::Matrix2d p = project_scaled_rotation(sym).realize();
          off_part.block<2, 2>(2 * i, 2 * j) = p;
          off_part.block<2, 2>(2 * j, 2 * i) = p.transpose();
        }
      out = diag_part + off_part;
      if (min_eigenvalue(out) >= 0.0) return out;
      // Uniform shrinkage of the off-diagonal blocks, keeping the phase
      // structure; min eigenvalue is concave in beta and nonnegative at 0.
      const double tol = 1e-8 * detail::matrix_scale(out);
      double lo = 0.0, hi = 1.0;
      for (int iter = 0; iter < 50; ++iter) {
        const double beta = 0.5 * (lo + hi);
        const double eig = min_eigenvalue(diag_part + beta * off_part);
        if (eig >= 0.0) {
          lo = beta;
          if (eig <= tol) break;
        } else {
          hi = beta;
        }
      }
      return diag_part + lo * off_part;
    }

    case Structure::DIM: {
      std::vector<double> row_sum(k, 0.0);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
          if (i == j) continue;
          ScaledRotation sr =
              project_scaled_rotation(detail::block2(raw, i, j));
          out.block<2, 2>(2 * i, 2 * j) = sr.realize();
          row_sum[i] += sr.gamma;
        }
      for (int i = 0; i < k; ++i) {
        Eigen::Matrix2d adjusted =
            detail::block2(raw, i, i) +
            row_sum[i] * Eigen::Matrix2d::Identity();
        ScaledRotation sr = project_scaled_rotation(adjusted);
        out.block<2, 2>(2 * i, 2 * i) =
            sr.realize() - row_sum[i] * Eigen::Matrix2d::Identity();
      }
      return out;
    }
  }
  throw validation_error("project_structure: unknown structure");
}

/// Declarative inputs for assembling a ModelSpec from a network description.
struct StateNetworkConfig {
  std::vector<Edge> edges;
  std::optional<Vec> diag_noise;  // CNM only: per-oscillator sigma override
};

struct ModelConfig {
  Structure structure = Structure::COM;
  double fs_hz = 100.0;
  int n_nodes = 0;
  std::vector<OscillatorSpec> oscillators;
  std::vector<StateNetworkConfig> states;
  Vec process_noise;              // K variances (sigma_k)
  Mat R;                          // N x N (scalar*I shorthand handled by IO)
  Mat Z;                          // M x M
  Vec switch_prior;               // optional, default uniform
  Vec mu1;                        // optional, default zero
  Mat C1;                         // optional, default identity
};

inline ModelSpec build_model(const ModelConfig& cfg) {
  const int k = static_cast<int>(cfg.oscillators.size());
  const int m = static_cast<int>(cfg.states.size());
  const int n = cfg.n_nodes;
  const int dim = 2 * k;
  if (k < 1) throw validation_error("build_model: no oscillators given");
  if (m < 1) throw validation_error("build_model: no states given");
  if (n < 1) throw validation_error("build_model: no nodes given");
  for (const auto& o : cfg.oscillators) o.validate();
  if (cfg.process_noise.size() != k)
    throw validation_error("build_model: need one process-noise entry per "
                           "oscillator");
  if (cfg.process_noise.minCoeff() < 0.0)
    throw validation_error("build_model: process noise must be >= 0");

  ModelSpec spec;
  spec.structure = cfg.structure;
  spec.n_states = m;
  spec.n_osc = k;
  spec.n_nodes = n;
  spec.fs_hz = cfg.fs_hz;
  spec.oscillators = cfg.oscillators;
  spec.R = cfg.R;
  spec.Z = cfg.Z;
  spec.switch_prior = cfg.switch_prior.size() == m
                          ? cfg.switch_prior
                          : Vec::Constant(m, 1.0 / m);
  spec.mu1 = cfg.mu1.size() == dim ? cfg.mu1 : Vec::Zero(dim);
  spec.C1 = (cfg.C1.rows() == dim && cfg.C1.cols() == dim)
                ? cfg.C1
                : Mat::Identity(dim, dim);

  Mat base_a = Mat::Zero(dim, dim);
  for (int i = 0; i < k; ++i)
    base_a.block<2, 2>(2 * i, 2 * i) = make_rotation_block(cfg.oscillators[i]);
  Mat base_sigma = Mat::Zero(dim, dim);
  for (int i = 0; i < k; ++i)
    base_sigma.block<2, 2>(2 * i, 2 * i) =
        cfg.process_noise(i) * Eigen::Matrix2d::Identity();

  auto check_node = [&](int idx, const char* what) {
    if (idx < 0 || idx >= n)
      throw validation_error(std::string("build_model: ") + what +
                             " index out of range");
  };
  auto check_osc = [&](int idx) {
    if (idx < 0 || idx >= k)
      throw validation_error("build_model: oscillator index out of range");
  };

  for (int j = 0; j < m; ++j) {
    const auto& st = cfg.states[j];
    std::vector<std::pair<int, int>> seen;
    for (const Edge& e : st.edges) {
      if (e.magnitude < 0.0)
        throw validation_error("build_model: edge magnitudes must be >= 0");
      // CNM links are undirected; (a,b) and (b,a) describe the same block.
      std::pair<int, int> key{e.from, e.to};
      if (cfg.structure == Structure::CNM && key.first > key.second)
        std::swap(key.first, key.second);
      for (const auto& s : seen)
        if (s == key)
          throw validation_error(
              "build_model: duplicate edge in state " + std::to_string(j + 1));
      seen.push_back(key);
    }

    switch (cfg.structure) {
      case Structure::COM: {
        Mat b = Mat::Zero(n, dim);
        for (const Edge& e : st.edges) {
          check_osc(e.from);
          check_node(e.to, "node");
          b(e.to, 2 * e.from) = e.magnitude * std::cos(e.phase_rad);
          b(e.to, 2 * e.from + 1) = e.magnitude * std::sin(e.phase_rad);
        }
        spec.A.push_back(base_a);
        spec.Sigma.push_back(base_sigma);
        spec.B.push_back(std::move(b));
        break;
      }
      case Structure::CNM: {
        if (k != n)
          throw validation_error("build_model: CNM requires K = N");
        Mat sigma = Mat::Zero(dim, dim);
        const Vec diag =
            st.diag_noise.has_value() ? *st.diag_noise : cfg.process_noise;
        if (diag.size() != k)
          throw validation_error("build_model: CNM diag noise needs K "
                                 "entries");
        for (int i = 0; i < k; ++i)
          sigma.block<2, 2>(2 * i, 2 * i) =
              diag(i) * Eigen::Matrix2d::Identity();
        for (const Edge& e : st.edges) {
          check_node(e.from, "node");
          check_node(e.to, "node");
          if (e.from == e.to)
            throw validation_error("build_model: CNM edge cannot link a node "
                                   "to itself");
          Eigen::Matrix2d blk = e.magnitude * rotation2(e.phase_rad);
          sigma.block<2, 2>(2 * e.from, 2 * e.to) = blk;
          sigma.block<2, 2>(2 * e.to, 2 * e.from) = blk.transpose();
        }
        if (!is_psd(sigma))
          throw validation_error(
              "build_model: CNM Sigma for state " + std::to_string(j + 1) +
              " is not positive semidefinite; reduce link magnitudes");
        Mat b = Mat::Zero(n, dim);
        for (int i = 0; i < k; ++i) b(i, 2 * i) = 1.0;
        spec.A.push_back(base_a);
        spec.Sigma.push_back(std::move(sigma));
        spec.B.push_back(std::move(b));
        break;
      }
      case Structure::DIM: {
        if (k != n)
          throw validation_error("build_model: DIM requires K = N");
        Mat a = base_a;
        std::vector<double> row_sum(k, 0.0);
        for (const Edge& e : st.edges) {
          check_node(e.from, "source node");
          check_node(e.to, "target node");
          if (e.from == e.to)
            throw validation_error("build_model: DIM edge cannot link a node "
                                   "to itself");
          a.block<2, 2>(2 * e.to, 2 * e.from) =
              e.magnitude * rotation2(e.phase_rad);
          row_sum[e.to] += e.magnitude;
        }
        for (int i = 0; i < k; ++i)
          a.block<2, 2>(2 * i, 2 * i) -=
              row_sum[i] * Eigen::Matrix2d::Identity();
        if (spectral_radius(a) >= 1.0) spec.unstable_flag = true;
        Mat b = Mat::Zero(n, dim);
        const double w = 1.0 / std::sqrt(2.0);
        for (int i = 0; i < k; ++i) {
          b(i, 2 * i) = w;
          b(i, 2 * i + 1) = w;
        }
        spec.A.push_back(std::move(a));
        spec.Sigma.push_back(base_sigma);
        spec.B.push_back(std::move(b));
        break;
      }
      case Structure::FREE:
        throw validation_error(
            "build_model: FREE models are constructed directly, not from "
            "edge lists");
    }
  }

  spec.validate();
  return spec;
}

}  // namespace oscnet

#endif  // OSCNET_MODEL_HPP
