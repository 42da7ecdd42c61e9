#ifndef TSNL_NDE_TRAIN_HPP
#define TSNL_NDE_TRAIN_HPP

#include "tsnl/nde/flow.hpp"
#include "tsnl/ssm.hpp"

namespace tsnl {

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 256;
  int max_epochs = 200;
  double validation_fraction = 0.1;
  int patience = 20;
};

struct TrainTrace {
  // entry 0 is the untrained model; entry e is after epoch e
  std::vector<double> train_loss;  // mean negative log-likelihood per record
  std::vector<double> val_loss;
  int best_epoch = 0;
  // true when the dataset was too small to split and validation loss is
  // evaluated on the training records
  bool degenerate_validation = false;
};

/// Event/context design matrices for a lagged dataset: event row = target,
/// context row = [window flattened oldest-first, theta].
void dataset_matrices(const LaggedDataset& data, Matrix& events,
                      Matrix& contexts);

/// Adam on minibatches of the negative log-likelihood, with a held-out
/// validation split, early stopping on validation loss, and restoration of
/// the best parameters. Standardization statistics of the training split are
/// stored in the flow before the first update. Throws TrainingFailure if the
/// loss turns non-finite.
TrainTrace train_flow(ConditionalFlow& flow, const LaggedDataset& data,
                      const TrainConfig& cfg, Rng& rng);

}  // namespace tsnl

#endif  // TSNL_NDE_TRAIN_HPP
