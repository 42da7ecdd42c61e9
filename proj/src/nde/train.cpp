#include "tsnl/nde/train.hpp"

#include <algorithm>
#include <numeric>

namespace tsnl {

void dataset_matrices(const LaggedDataset& data, Matrix& events,
                      Matrix& contexts) {
  const int n = static_cast<int>(data.records.size());
  if (n == 0) throw std::invalid_argument("dataset_matrices: empty dataset");
  const int d_y = static_cast<int>(data.records[0].target.size());
  const int d_theta = static_cast<int>(data.records[0].theta.size());
  const int win = static_cast<int>(data.records[0].window.size());
  events.resize(n, d_y);
  contexts.resize(n, win + d_theta);
  for (int i = 0; i < n; ++i) {
    const LaggedRecord& r = data.records[i];
    events.row(i) = r.target.transpose();
    int off = 0;
    for (int t = 0; t < r.window.rows(); ++t) {
      contexts.row(i).segment(off, r.window.cols()) = r.window.row(t);
      off += static_cast<int>(r.window.cols());
    }
    contexts.row(i).segment(off, d_theta) = r.theta.transpose();
  }
}

namespace {

Matrix take_rows(const Matrix& m, const std::vector<int>& idx, int lo, int hi) {
  Matrix out(hi - lo, m.cols());
  for (int i = lo; i < hi; ++i) out.row(i - lo) = m.row(idx[i]);
  return out;
}

}  // namespace

TrainTrace train_flow(ConditionalFlow& flow, const LaggedDataset& data,
                      const TrainConfig& cfg, Rng& rng) {
  if (cfg.validation_fraction <= 0.0 || cfg.validation_fraction >= 1.0) {
    throw std::invalid_argument("train_flow: validation fraction must be in (0,1)");
  }
  Matrix events, contexts;
  dataset_matrices(data, events, contexts);
  const int n = static_cast<int>(events.rows());

  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  int n_val = static_cast<int>(cfg.validation_fraction * n);
  TrainTrace trace;
  if (n_val == 0) trace.degenerate_validation = true;

  const Matrix ev_train = take_rows(events, idx, n_val, n);
  const Matrix ctx_train = take_rows(contexts, idx, n_val, n);
  const Matrix ev_val =
      trace.degenerate_validation ? ev_train : take_rows(events, idx, 0, n_val);
  const Matrix ctx_val =
      trace.degenerate_validation ? ctx_train : take_rows(contexts, idx, 0, n_val);
  const int n_train = static_cast<int>(ev_train.rows());

  {
    const Vector ev_mean = ev_train.colwise().mean();
    const Vector ev_sd =
        ((ev_train.rowwise() - ev_mean.transpose()).array().square().colwise().sum() /
         n_train)
            .sqrt();
    Vector ctx_mean = Vector::Zero(ctx_train.cols());
    Vector ctx_sd = Vector::Ones(ctx_train.cols());
    if (ctx_train.cols() > 0) {
      ctx_mean = ctx_train.colwise().mean();
      ctx_sd = ((ctx_train.rowwise() - ctx_mean.transpose())
                    .array()
                    .square()
                    .colwise()
                    .sum() /
                n_train)
                   .sqrt();
    }
    flow.set_standardization(ev_mean, ev_sd, ctx_mean, ctx_sd);
  }

  auto mean_nll = [&](const Matrix& ev, const Matrix& ctx) {
    return -flow.log_prob(ev, ctx).mean();
  };
  trace.train_loss.push_back(mean_nll(ev_train, ctx_train));
  trace.val_loss.push_back(mean_nll(ev_val, ctx_val));

  const int P = flow.trainable_parameter_count();
  Vector params = flow.parameters();
  Vector best_params = params;
  double best_val = trace.val_loss[0];
  trace.best_epoch = 0;
  Vector m = Vector::Zero(P), v = Vector::Zero(P), grad(P);
  long long step = 0;
  int since_best = 0;

  std::vector<int> order(n_train);
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (int start = 0; start < n_train; start += cfg.batch_size) {
      const int stop = std::min(n_train, start + cfg.batch_size);
      const Matrix ev_b = take_rows(ev_train, order, start, stop);
      const Matrix ctx_b = take_rows(ctx_train, order, start, stop);
      const double loss = flow.loss_and_grad(ev_b, ctx_b, grad);
      if (!std::isfinite(loss)) {
        throw TrainingFailure("train_flow: non-finite loss at epoch " +
                              std::to_string(epoch));
      }
      epoch_loss += loss * (stop - start);
      ++step;
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
      const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      params -= (cfg.learning_rate / bc1) *
                m.cwiseQuotient(((v / bc2).cwiseSqrt().array() + cfg.eps).matrix());
      flow.set_parameters(params);
    }
    trace.train_loss.push_back(epoch_loss / n_train);
    const double val = mean_nll(ev_val, ctx_val);
    if (!std::isfinite(val)) {
      throw TrainingFailure("train_flow: non-finite validation loss at epoch " +
                            std::to_string(epoch));
    }
    trace.val_loss.push_back(val);
    if (val < best_val) {
      best_val = val;
      best_params = params;
      trace.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  flow.set_parameters(best_params);
  return trace;
}

}  // namespace tsnl
