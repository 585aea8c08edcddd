#include "recsteal/attention.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace recsteal {

namespace {

// Two-way softmax with max subtraction.
std::pair<double, double> softmax2(double a, double b) {
  const double m = std::max(a, b);
  const double ea = std::exp(a - m);
  const double eb = std::exp(b - m);
  const double z = ea + eb;
  return {ea / z, eb / z};
}

}  // namespace

std::pair<double, double> attention_coefficients(std::span<const double> p,
                                                 std::span<const double> q_clone,
                                                 std::span<const double> q_aux,
                                                 const AttentionParams& att) {
  double alpha = att.b;
  double beta = att.b;
  for (std::size_t i = 0; i < p.size(); ++i) {
    alpha += att.w[i] * std::max(0.0, p[i] * q_clone[i]);
    beta += att.w[i] * std::max(0.0, p[i] * q_aux[i]);
  }
  return softmax2(alpha, beta);
}

double FusedCloneModel::score(int user, int item) const {
  FusedScoreCtx ctx;
  return fused_forward(*this, user, item, ctx);
}

FusedCloneModel wrap_plain(EmbeddingModel m) {
  FusedCloneModel f;
  f.kind = m.kind;
  f.P = std::move(m.P);
  f.Q_c = std::move(m.Q);
  f.attention.w.assign(static_cast<std::size_t>(f.P.cols), 0.0);
  f.attention.b = 0.0;
  f.head = std::move(m.head);
  return f;
}

FusedCloneModel make_fused(EmbeddingModel clone, Matrix q_aux,
                           std::vector<std::uint8_t> aux_eligible) {
  if (q_aux.rows != clone.Q.rows || q_aux.cols != clone.Q.cols) {
    throw std::invalid_argument("make_fused: auxiliary matrix shape mismatch");
  }
  if (aux_eligible.size() != static_cast<std::size_t>(q_aux.rows)) {
    throw std::invalid_argument("make_fused: eligibility mask size mismatch");
  }
  FusedCloneModel f = wrap_plain(std::move(clone));
  f.Q_a = std::move(q_aux);
  f.aux_eligible = std::move(aux_eligible);
  return f;
}

EmbeddingModel unwrap_plain(FusedCloneModel m) {
  EmbeddingModel out;
  out.kind = m.kind;
  out.P = std::move(m.P);
  out.Q = std::move(m.Q_c);
  out.head = std::move(m.head);
  return out;
}

CloneGrads::CloneGrads(const FusedCloneModel& m)
    : P(m.P.rows, m.P.cols),
      Q_c(m.Q_c.rows, m.Q_c.cols),
      att_w(m.attention.w.size(), 0.0),
      head_w(m.head ? m.head->w.size() : 0, 0.0) {}

void CloneGrads::zero() {
  P.set_zero();
  Q_c.set_zero();
  std::fill(att_w.begin(), att_w.end(), 0.0);
  att_b = 0.0;
  std::fill(head_w.begin(), head_w.end(), 0.0);
  head_b = 0.0;
}

void CloneGrads::scale(double s) {
  for (double& x : P.data) x *= s;
  for (double& x : Q_c.data) x *= s;
  for (double& x : att_w) x *= s;
  att_b *= s;
  for (double& x : head_w) x *= s;
  head_b *= s;
}

double fused_forward(const FusedCloneModel& m, int user, int item, FusedScoreCtx& ctx) {
  if (user < 0 || user >= m.num_users()) throw std::out_of_range("fused_forward: user index");
  if (item < 0 || item >= m.num_items()) throw std::out_of_range("fused_forward: item index");
  ctx.user = user;
  ctx.item = item;
  ctx.fused = m.fuses(item);
  const auto p = m.P.row(user);
  const auto qc = m.Q_c.row(item);

  if (!ctx.fused) {
    if (m.kind == ModelKind::GMF) return gmf_score(*m.head, p, qc);
    return dot(p, qc);
  }

  const auto qa = m.Q_a.row(item);
  const std::size_t d = p.size();
  ctx.h_c.resize(d);
  ctx.h_a.resize(d);
  ctx.q_f.resize(d);
  double alpha = m.attention.b;
  double beta = m.attention.b;
  for (std::size_t i = 0; i < d; ++i) {
    ctx.h_c[i] = std::max(0.0, p[i] * qc[i]);
    ctx.h_a[i] = std::max(0.0, p[i] * qa[i]);
    alpha += m.attention.w[i] * ctx.h_c[i];
    beta += m.attention.w[i] * ctx.h_a[i];
  }
  const auto [an, bn] = softmax2(alpha, beta);
  ctx.alpha_n = an;
  ctx.beta_n = bn;
  for (std::size_t i = 0; i < d; ++i) ctx.q_f[i] = an * qc[i] + bn * qa[i];

  if (m.kind == ModelKind::GMF) {
    ctx.score_gap = gmf_score(*m.head, p, qc) - gmf_score(*m.head, p, qa);
    return gmf_score(*m.head, p, ctx.q_f);
  }
  ctx.score_gap = dot(p, qc) - dot(p, qa);
  return dot(p, ctx.q_f);
}

void fused_backward(const FusedCloneModel& m, const FusedScoreCtx& ctx, double upstream,
                    CloneGrads& g) {
  const auto p = m.P.row(ctx.user);
  const auto qc = m.Q_c.row(ctx.item);
  auto gp = g.P.row(ctx.user);
  auto gqc = g.Q_c.row(ctx.item);
  const std::size_t d = p.size();

  if (!ctx.fused) {
    if (m.kind == ModelKind::GMF) {
      const auto& wo = m.head->w;
      for (std::size_t i = 0; i < d; ++i) {
        gp[i] += upstream * wo[i] * qc[i];
        gqc[i] += upstream * wo[i] * p[i];
        g.head_w[i] += upstream * p[i] * qc[i];
      }
      g.head_b += upstream;
    } else {
      axpy(upstream, qc, gp);
      axpy(upstream, p, gqc);
    }
    return;
  }

  const auto qa = m.Q_a.row(ctx.item);
  // Chain through the softmax: d(score)/d(alpha - beta).
  const double att_chain = upstream * ctx.score_gap * ctx.alpha_n * ctx.beta_n;
  const bool gmf = (m.kind == ModelKind::GMF);
  const std::vector<double>* wo = gmf ? &m.head->w : nullptr;

  for (std::size_t i = 0; i < d; ++i) {
    const double mask_c = ctx.h_c[i] > 0.0 ? 1.0 : 0.0;
    const double mask_a = ctx.h_a[i] > 0.0 ? 1.0 : 0.0;
    const double a_i = gmf ? (*wo)[i] * p[i] : p[i];  // d(score)/d(q_f[i])
    // direct paths through q_f, then the attention chain
    const double direct_p = gmf ? (*wo)[i] * ctx.q_f[i] : ctx.q_f[i];
    gp[i] += upstream * direct_p +
             att_chain * m.attention.w[i] * (mask_c * qc[i] - mask_a * qa[i]);
    gqc[i] += upstream * ctx.alpha_n * a_i + att_chain * m.attention.w[i] * mask_c * p[i];
    g.att_w[i] += att_chain * (ctx.h_c[i] - ctx.h_a[i]);
    if (gmf) g.head_w[i] += upstream * p[i] * ctx.q_f[i];
  }
  // att.b cancels in alpha - beta, so its gradient is identically zero.
  if (gmf) g.head_b += upstream;
}

}  // namespace recsteal
