#include "epl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace epl {

namespace {

struct Layout {
  Index w1, b1, w2, b2, w3, b3, total;
  Index cin, k;
};

Layout layout(int in_channels, int classes) {
  Layout l{};
  l.cin = in_channels;
  l.k = classes;
  const Index h = kHiddenChannels;
  l.w1 = 0;
  l.b1 = l.w1 + 9 * l.cin * h;
  l.w2 = l.b1 + h;
  l.b2 = l.w2 + 9 * h * h;
  l.w3 = l.b2 + h;
  l.b3 = l.w3 + h * l.k;
  l.total = l.b3 + l.k;
  return l;
}

using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
using MatMap = Eigen::Map<Eigen::MatrixXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

// (pixels x C) -> (pixels x 9C), 3x3 neighbourhood, zero padded.
Eigen::MatrixXd im2col(const Eigen::MatrixXd& x, Index rows, Index cols) {
  const Index c = x.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows * cols, 9 * c);
  for (int ky = 0; ky < 3; ++ky) {
    for (int kx = 0; kx < 3; ++kx) {
      const Index block = (ky * 3 + kx) * c;
      for (Index y = 0; y < rows; ++y) {
        const Index yy = y + ky - 1;
        if (yy < 0 || yy >= rows) continue;
        for (Index xpos = 0; xpos < cols; ++xpos) {
          const Index xx = xpos + kx - 1;
          if (xx < 0 || xx >= cols) continue;
          out.block(y * cols + xpos, block, 1, c) = x.row(yy * cols + xx);
        }
      }
    }
  }
  return out;
}

// Adjoint of im2col.
Eigen::MatrixXd col2im(const Eigen::MatrixXd& g, Index rows, Index cols, Index c) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows * cols, c);
  for (int ky = 0; ky < 3; ++ky) {
    for (int kx = 0; kx < 3; ++kx) {
      const Index block = (ky * 3 + kx) * c;
      for (Index y = 0; y < rows; ++y) {
        const Index yy = y + ky - 1;
        if (yy < 0 || yy >= rows) continue;
        for (Index xpos = 0; xpos < cols; ++xpos) {
          const Index xx = xpos + kx - 1;
          if (xx < 0 || xx >= cols) continue;
          out.row(yy * cols + xx) += g.block(y * cols + xpos, block, 1, c);
        }
      }
    }
  }
  return out;
}

Eigen::MatrixXd relu(const Eigen::MatrixXd& m) { return m.cwiseMax(0.0); }

struct Terms {
  LossBreakdown breakdown;
  std::optional<ProbabilityField> grad_probs;
};

Terms loss_terms(const ProbabilityField& probs, const LabelMap& labels, const ObjectiveConfig& cfg,
                 bool with_gradient) {
  Terms t;
  const ProbabilityLoss ce = cross_entropy_loss(probs, labels, with_gradient);
  const PotentialFieldSet<double> gt_e = convert(one_hot(labels, labels.classes()), cfg.ac, cfg.conversion);
  const PotentialFieldSet<double> pred_e = convert(probs, cfg.ac, cfg.conversion);
  const bool epl_grad = with_gradient && cfg.epl;
  const EnergyLoss point = point_loss(gt_e, pred_e, cfg.loss, epl_grad && cfg.loss.lambda1 != 0.0);
  const EnergyLoss line =
      equipotential_line_loss(gt_e, pred_e, cfg.loss, cfg.ac.radius(), epl_grad && cfg.loss.lambda2 != 0.0);

  LossConfig weights = cfg.loss;
  if (!cfg.epl) weights.lambda1 = weights.lambda2 = 0.0;
  const ProbabilityLoss combined = combine_losses(ce, pull_back(point, cfg.ac, cfg.conversion),
                                                  pull_back(line, cfg.ac, cfg.conversion), weights);
  t.breakdown = {ce.value, point.value, line.value, combined.value};
  t.grad_probs = combined.gradient;
  return t;
}

bool finite(const LossBreakdown& l) {
  return std::isfinite(l.ce) && std::isfinite(l.point) && std::isfinite(l.line) &&
         std::isfinite(l.total);
}

}  // namespace

TinyNet::TinyNet(int in_channels, int classes)
    : in_channels_(in_channels), classes_(classes) {
  if (in_channels < 1 || classes < 2) throw DomainError("TinyNet: need Cin >= 1 and K >= 2");
  theta_ = Eigen::VectorXd::Zero(parameter_count(in_channels, classes));
}

Index TinyNet::parameter_count(int in_channels, int classes) {
  return layout(in_channels, classes).total;
}

void TinyNet::initialize(std::uint64_t seed) {
  const Layout l = layout(in_channels_, classes_);
  std::mt19937_64 rng(seed);
  auto fill = [&](Index from, Index to, double fan_in) {
    std::uniform_real_distribution<double> u(-std::sqrt(1.0 / fan_in), std::sqrt(1.0 / fan_in));
    for (Index i = from; i < to; ++i) theta_[i] = u(rng);
  };
  fill(l.w1, l.w2, 9.0 * l.cin);
  fill(l.w2, l.w3, 9.0 * kHiddenChannels);
  fill(l.w3, l.total, kHiddenChannels);
}

nlohmann::json TinyNet::architecture() const {
  return {{"name", "tinynet"},
          {"layers",
           {"conv3x3(" + std::to_string(in_channels_) + "->8)+relu", "conv3x3(8->8)+relu",
            "conv1x1(8->" + std::to_string(classes_) + ")", "softmax"}},
          {"in_channels", in_channels_},
          {"classes", classes_},
          {"parameters", theta_.size()}};
}

Field<double> image_field(const Plane<float>& image) {
  Field<double> f(1, image.rows(), image.cols());
  f[0] = image.cast<double>();
  return f;
}

ForwardCache forward_cached(const TinyNet& net, const Field<double>& image, ForwardTrace* trace) {
  if (image.channels() != net.in_channels()) {
    throw DomainError("forward: image has " + std::to_string(image.channels()) +
                      " channels, network expects " + std::to_string(net.in_channels()));
  }
  if (image.rows() <= 0 || image.cols() <= 0) throw DomainError("forward: empty image");
  const Layout l = layout(net.in_channels(), net.classes());
  const Eigen::VectorXd& th = net.parameters();
  const Index h = kHiddenChannels;
  const ConstMatMap w1(th.data() + l.w1, 9 * l.cin, h);
  const ConstVecMap b1(th.data() + l.b1, h);
  const ConstMatMap w2(th.data() + l.w2, 9 * h, h);
  const ConstVecMap b2(th.data() + l.b2, h);
  const ConstMatMap w3(th.data() + l.w3, h, l.k);
  const ConstVecMap b3(th.data() + l.b3, l.k);

  ForwardCache fc;
  fc.rows = image.rows();
  fc.cols = image.cols();
  const Index n = fc.rows * fc.cols;
  fc.input.resize(n, l.cin);
  for (Index c = 0; c < l.cin; ++c) {
    fc.input.col(c) = Eigen::Map<const Eigen::VectorXd>(image[c].data(), n);
  }
  fc.cols1 = im2col(fc.input, fc.rows, fc.cols);
  fc.pre1 = (fc.cols1 * w1).rowwise() + b1.transpose();
  fc.act1 = relu(fc.pre1);
  fc.cols2 = im2col(fc.act1, fc.rows, fc.cols);
  fc.pre2 = (fc.cols2 * w2).rowwise() + b2.transpose();
  fc.act2 = relu(fc.pre2);
  fc.logits = (fc.act2 * w3).rowwise() + b3.transpose();

  Field<double> logits(l.k, fc.rows, fc.cols);
  for (Index c = 0; c < l.k; ++c) {
    Eigen::Map<Eigen::VectorXd>(logits[c].data(), n) = fc.logits.col(c);
  }
  fc.probs = softmax(logits);

  if (trace) {
    const auto un = static_cast<std::uint64_t>(n);
    trace->macs += un * static_cast<std::uint64_t>(9 * l.cin * h + 9 * h * h + h * l.k);
    trace->activations += un * static_cast<std::uint64_t>(2 * h + l.k);
  }
  return fc;
}

ProbabilityField forward(const TinyNet& net, const Field<double>& image, ForwardTrace* trace) {
  return forward_cached(net, image, trace).probs;
}

LabelMap argmax_labels(const ProbabilityField& probs) {
  LabelPlane out(probs.rows(), probs.cols());
  for (Index p = 0; p < out.size(); ++p) {
    Index best = 0;
    for (Index c = 1; c < probs.channels(); ++c) {
      if (probs[c].data()[p] > probs[best].data()[p]) best = c;
    }
    out.data()[p] = static_cast<std::int32_t>(best);
  }
  return LabelMap(std::move(out), static_cast<int>(probs.channels()));
}

LossBreakdown objective(const TinyNet& net, const Field<double>& image, const LabelMap& labels,
                        const ObjectiveConfig& cfg) {
  const ProbabilityField probs = forward(net, image);
  return loss_terms(probs, labels, cfg, false).breakdown;
}

BackwardResult backward(const TinyNet& net, const Field<double>& image, const LabelMap& labels,
                        const ObjectiveConfig& cfg) {
  if (labels.rows() != image.rows() || labels.cols() != image.cols()) {
    throw DomainError("backward: label and image dimensions differ");
  }
  if (labels.classes() != net.classes()) throw DomainError("backward: class count mismatch");
  const ForwardCache fc = forward_cached(net, image);
  Terms terms = loss_terms(fc.probs, labels, cfg, true);
  if (!finite(terms.breakdown)) throw TrainingDiverged("backward: non-finite loss");

  const Layout l = layout(net.in_channels(), net.classes());
  const Eigen::VectorXd& th = net.parameters();
  const Index h = kHiddenChannels;
  const Index n = fc.rows * fc.cols;
  const ConstMatMap w2(th.data() + l.w2, 9 * h, h);
  const ConstMatMap w3(th.data() + l.w3, h, l.k);

  const Field<double> dz = softmax_backward(fc.probs, *terms.grad_probs);
  Eigen::MatrixXd d_logits(n, l.k);
  for (Index c = 0; c < l.k; ++c) d_logits.col(c) = Eigen::Map<const Eigen::VectorXd>(dz[c].data(), n);

  BackwardResult out;
  out.loss = terms.breakdown;
  out.gradient = Eigen::VectorXd::Zero(l.total);
  MatMap gw1(out.gradient.data() + l.w1, 9 * l.cin, h);
  MatMap gw2(out.gradient.data() + l.w2, 9 * h, h);
  MatMap gw3(out.gradient.data() + l.w3, h, l.k);

  gw3 = fc.act2.transpose() * d_logits;
  out.gradient.segment(l.b3, l.k) = d_logits.colwise().sum().transpose();

  const Eigen::MatrixXd d_pre2 =
      ((d_logits * w3.transpose()).array() * (fc.pre2.array() > 0.0).cast<double>()).matrix();
  gw2 = fc.cols2.transpose() * d_pre2;
  out.gradient.segment(l.b2, h) = d_pre2.colwise().sum().transpose();

  const Eigen::MatrixXd d_act1 = col2im(d_pre2 * w2.transpose(), fc.rows, fc.cols, h);
  const Eigen::MatrixXd d_pre1 = (d_act1.array() * (fc.pre1.array() > 0.0).cast<double>()).matrix();
  gw1 = fc.cols1.transpose() * d_pre1;
  out.gradient.segment(l.b1, h) = d_pre1.colwise().sum().transpose();
  return out;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw DomainError("train: epochs must be positive");
  if (batch_size < 1) throw DomainError("train: batch size must be positive");
  if (!(learning_rate > 0.0)) throw DomainError("train: learning rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw DomainError("train: momentum must be in [0, 1)");
  objective.loss.validate();
  objective.ac.validate();
}

EvalReport evaluate_model(const TinyNet& net, const std::vector<Sample>& data,
                          const std::vector<int>& trimap_widths,
                          const std::vector<int>& f_tolerances) {
  std::vector<EvalReport> reports;
  reports.reserve(data.size());
  for (const auto& s : data) {
    const LabelMap pred = argmax_labels(forward(net, image_field(s.image)));
    reports.push_back(evaluate(pred, s.labels, net.classes(), trimap_widths, f_tolerances));
  }
  return aggregate(reports);
}

TrainResult train(TinyNet& net, const std::vector<Sample>& data, const std::vector<Sample>& eval,
                  const TrainConfig& cfg, const std::function<void(const EpochRecord&)>& on_epoch) {
  cfg.validate();
  if (data.empty()) throw DomainError("train: empty dataset");
  const std::vector<Sample>& eval_set = eval.empty() ? data : eval;

  std::vector<int> widths = cfg.trimap_widths;
  if (std::find(widths.begin(), widths.end(), cfg.history_trimap_width) == widths.end()) {
    widths.push_back(cfg.history_trimap_width);
  }
  std::vector<int> tols = cfg.f_tolerances;
  if (std::find(tols.begin(), tols.end(), cfg.history_f_tolerance) == tols.end()) {
    tols.push_back(cfg.history_f_tolerance);
  }

  std::vector<Field<double>> images;
  images.reserve(data.size());
  for (const auto& s : data) images.push_back(image_field(s.image));

  TrainResult result;
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(net.parameters().size());
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    EpochRecord rec;
    rec.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(net.parameters().size());
      for (std::size_t i = start; i < stop; ++i) {
        const std::size_t idx = order[i];
        BackwardResult br;
        try {
          br = backward(net, images[idx], data[idx].labels, cfg.objective);
        } catch (const TrainingDiverged& e) {
          throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch) +
                                 ", sample " + std::to_string(idx) + ": " + e.what());
        }
        grad += br.gradient;
        rec.ce += br.loss.ce;
        rec.point += br.loss.point;
        rec.line += br.loss.line;
      }
      grad /= static_cast<double>(stop - start);
      if (!grad.allFinite()) {
        throw TrainingDiverged("training diverged at epoch " + std::to_string(epoch) +
                               ": non-finite gradient");
      }
      velocity = cfg.momentum * velocity + grad;
      net.parameters() -= cfg.learning_rate * velocity;
    }
    const double n = static_cast<double>(data.size());
    rec.ce /= n;
    rec.point /= n;
    rec.line /= n;

    const EvalReport report = evaluate_model(net, eval_set, widths, tols);
    rec.miou = report.miou;
    rec.trimap_iou = report.trimap_iou.at(cfg.history_trimap_width).value_or(0.0);
    rec.fmeasure = report.fmeasure.at(cfg.history_f_tolerance);
    result.history.push_back(rec);
    result.final_eval = report;
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

std::string history_csv(const std::vector<EpochRecord>& history) {
  std::ostringstream os;
  os.precision(10);
  os << "epoch,L_ce,L_point,L_line,miou,trimap_iou,fmeasure\n";
  for (const auto& r : history) {
    os << r.epoch << ',' << r.ce << ',' << r.point << ',' << r.line << ',' << r.miou << ','
       << r.trimap_iou << ',' << r.fmeasure << '\n';
  }
  return os.str();
}

nlohmann::json history_json(const std::vector<EpochRecord>& history) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : history) {
    j.push_back({{"epoch", r.epoch},
                 {"L_ce", r.ce},
                 {"L_point", r.point},
                 {"L_line", r.line},
                 {"miou", r.miou},
                 {"trimap_iou", r.trimap_iou},
                 {"fmeasure", r.fmeasure}});
  }
  return j;
}

}  // namespace epl
