#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kxdoc/pipeline.hpp"

namespace kxdoc {

struct TrainConfig {
    double learning_rate = 1e-3;  // desk-scale default; 3e-5 at paper scale
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int epochs = 100;
    int batch_size = 4;  // bags accumulated per update
    std::uint64_t seed = 7;
};

struct EpochLog {
    int epoch = 0;
    double mean_loss = 0.0;
    double train_f1 = 0.0;
};

// Adaptive moment estimation with decoupled weight decay.
class AdamW {
  public:
    AdamW(std::vector<nn::Param*> params, const TrainConfig& cfg);
    void step();

  private:
    std::vector<nn::Param*> params_;
    std::vector<nn::Mat> m_, v_;
    TrainConfig cfg_;
    long t_ = 0;
};

// Full-gradient training over prepared bags. Deterministic for a fixed seed:
// shuffling, batching, and accumulation order are all pinned. Throws
// NumericalError if the loss stops being finite.
std::vector<EpochLog> train_model(Model& model, const std::vector<PreparedBag>& bags,
                                  const TrainConfig& cfg);

// Forward-only predictions, aligned with `bags`.
std::vector<std::set<int>> predict(Model& model, const std::vector<PreparedBag>& bags);

void write_training_log(const std::vector<EpochLog>& log, const std::string& path);

}  // namespace kxdoc
