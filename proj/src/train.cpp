#include "kxdoc/train.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "kxdoc/metrics.hpp"

namespace kxdoc {

AdamW::AdamW(std::vector<nn::Param*> params, const TrainConfig& cfg)
    : params_(std::move(params)), cfg_(cfg) {
    for (const nn::Param* p : params_) {
        m_.emplace_back(p->w.rows, p->w.cols);
        v_.emplace_back(p->w.rows, p->w.cols);
    }
}

void AdamW::step() {
    ++t_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
    double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
    for (std::size_t k = 0; k < params_.size(); ++k) {
        nn::Param& p = *params_[k];
        for (std::size_t i = 0; i < p.w.a.size(); ++i) {
            double g = p.g.a[i];
            m_[k].a[i] = cfg_.beta1 * m_[k].a[i] + (1.0 - cfg_.beta1) * g;
            v_[k].a[i] = cfg_.beta2 * v_[k].a[i] + (1.0 - cfg_.beta2) * g * g;
            double mhat = m_[k].a[i] / bc1;
            double vhat = v_[k].a[i] / bc2;
            p.w.a[i] -= cfg_.learning_rate *
                        (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * p.w.a[i]);
        }
    }
}

std::vector<std::set<int>> predict(Model& model, const std::vector<PreparedBag>& bags) {
    std::vector<std::set<int>> preds;
    preds.reserve(bags.size());
    for (const PreparedBag& pb : bags) preds.push_back(model.forward(pb).scores.predicted);
    return preds;
}

std::vector<EpochLog> train_model(Model& model, const std::vector<PreparedBag>& bags,
                                  const TrainConfig& cfg) {
    if (bags.empty()) throw std::invalid_argument("training corpus is empty");
    AdamW opt(model.parameters(), cfg);
    nn::Rng shuffle_rng(cfg.seed);

    std::vector<std::set<int>> gold;
    for (const PreparedBag& pb : bags) gold.push_back(pb.gold);

    std::vector<EpochLog> log;
    std::vector<std::size_t> order(bags.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t i = 0;
        while (i < order.size()) {
            std::size_t batch_end = std::min(order.size(), i + cfg.batch_size);
            int batch_n = static_cast<int>(batch_end - i);
            model.zero_grad();
            for (; i < batch_end; ++i) {
                const PreparedBag& pb = bags[order[i]];
                Model::BagForward fwd = model.forward(pb);
                double l = model.loss(fwd.scores, pb.gold);
                if (!std::isfinite(l))
                    throw NumericalError("loss diverged on bag " + pb.bag_id + " at epoch " +
                                         std::to_string(epoch));
                loss_sum += l;
                std::vector<double> dpooled = model.loss_grad(fwd.scores, pb.gold);
                double inv = 1.0 / batch_n;
                for (double& v : dpooled) v *= inv;
                model.backward(fwd, pb, dpooled);
            }
            opt.step();
        }

        EpochLog el;
        el.epoch = epoch;
        el.mean_loss = loss_sum / bags.size();
        el.train_f1 = compute_f1(predict(model, bags), gold);
        log.push_back(el);
    }
    return log;
}

void write_training_log(const std::vector<EpochLog>& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    char buf[160];
    for (const EpochLog& e : log) {
        std::snprintf(buf, sizeof(buf), "{\"epoch\":%d,\"loss\":%.12g,\"train_f1\":%.12g}\n",
                      e.epoch, e.mean_loss, e.train_f1);
        out << buf;
    }
}

}  // namespace kxdoc
