#pragma once

namespace recsteal {

// Numerically stable primitives. All log-sigmoid terms go through softplus;
// raw scores are never exponentiated directly.
double softplus(double x);
double sigmoid(double x);

// Pairwise log-sigmoid ranking loss: -ln sigmoid(r_pos - r_neg).
double loss_bpr(double r_pos, double r_neg);
// Derivative of loss_bpr with respect to (r_pos - r_neg).
double dloss_bpr_ddiff(double diff);

// Margin hinge: max(0, m - (r_pos - r_neg)).
double loss_hinge(double r_pos, double r_neg, double margin);
double dloss_hinge_ddiff(double diff, double margin);

// Pointwise binary logistic loss on a raw score; label is 0 or 1.
double loss_logistic(double r, int label);
double dloss_logistic_dr(double r, int label);

}  // namespace recsteal
