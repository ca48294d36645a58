#include "ppgt/case_study.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <string>
#include <thread>

#include "ppgt/ops.hpp"
#include "ppgt/optim.hpp"

namespace ppgt {
namespace {

std::vector<Tensor*> autoencoder_params(AutoEncoder& m) {
  std::vector<Tensor*> p = {&m.fc1.weight};
  if (m.has_bias) p.push_back(&m.fc1.bias);
  switch (m.norm.kind) {
    case NormKind::ln:
    case NormKind::bn: p.insert(p.end(), {&m.norm.gamma, &m.norm.beta}); break;
    case NormKind::rmsn: p.push_back(&m.norm.gamma); break;
    case NormKind::adarmsn: p.insert(p.end(), {&m.norm.alpha, &m.norm.beta}); break;
  }
  p.push_back(&m.fc2.weight);
  if (m.has_bias) p.push_back(&m.fc2.bias);
  return p;
}

Tensor mse_loss(const Tensor& y, const Tensor& x) { return ops::mean_all(ops::square(y - x)); }

void evaluate(const Tensor& x, AutoEncoder& model, CaseStudyReport& report) {
  NoGrad no_grad;
  const Tensor y = autoencoder_forward(x, model, false);
  report.mse = mse_loss(y, x).item();
  const std::size_t n = x.dim(0);
  double radial = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ry = std::hypot(y[2 * i], y[2 * i + 1]);
    const double rx = std::hypot(x[2 * i], x[2 * i + 1]);
    radial += (ry - rx) * (ry - rx);
  }
  report.radial_mse = radial / static_cast<double>(n);
}

void check_options(const CaseStudyOptions& o) {
  if (o.norm == NormKind::ln) throw Error("case study: norm must be bn, rmsn or adarmsn");
  if (o.n_points < 16) throw Error("case study: needs at least 16 points");
  if (o.hidden == 0) throw Error("case study: hidden width must be positive");
  if (o.batch_size > 0) {
    if (o.norm == NormKind::bn && o.batch_size < 2) {
      throw Error("case study: degenerate batch (bn needs batch size >= 2)");
    }
    if (o.batch_size > o.n_points) throw Error("case study: batch size exceeds the point count");
    if (o.total_steps == 0) throw Error("case study: mini-batch mode needs total_steps > 0");
  }
}

Tensor rows_of(const Tensor& x, std::span<const std::size_t> index) {
  return ops::gather_rows(x, index);
}

}  // namespace

AutoEncoder AutoEncoder::init(NormKind norm, std::size_t hidden, bool bias, Rng& rng) {
  const double a = std::sqrt(5.0);
  AutoEncoder m;
  m.fc1 = Linear::kaiming_uniform(2, hidden, a, rng);
  m.norm = NormParams::init(norm, hidden);
  m.fc2 = Linear::kaiming_uniform(hidden, 2, a, rng);
  m.has_bias = bias;
  if (!bias) {
    m.fc1.bias = Tensor::zeros({hidden});
    m.fc2.bias = Tensor::zeros({2});
  }
  return m;
}

Tensor autoencoder_forward(const Tensor& x, AutoEncoder& model, bool training) {
  const Tensor h = linear(x, model.fc1);
  const Tensor z = model.norm.kind == NormKind::bn ? batch_norm_1d(h, model.norm, training)
                                                   : normalize(h, model.norm);
  return linear(z, model.fc2);
}

Tensor case_study_points(std::size_t n, Rng& rng) {
  std::vector<double> pts(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = rng.uniform(0.5, 1.5);
    const double t = rng.uniform(0.0, 2.0 * std::numbers::pi);
    pts[2 * i] = r * std::cos(t);
    pts[2 * i + 1] = r * std::sin(t);
  }
  return Tensor({n, 2}, std::move(pts));
}

CaseStudyReport case_study_autoencoder(const CaseStudyOptions& options) {
  check_options(options);
  const Rng root(options.seed);
  Rng data_rng = root.split("data");
  Rng init_rng = root.split("init");
  Rng batch_rng = root.split("batches");
  const Tensor x = case_study_points(options.n_points, data_rng);
  AutoEncoder model = AutoEncoder::init(options.norm, options.hidden, options.linear_bias, init_rng);

  OptimizerState opt;
  opt.lr = options.lr;
  opt.weight_decay = options.weight_decay;

  CaseStudyReport report;
  report.norm = options.norm;
  report.seed = options.seed;
  report.batch_size = options.batch_size;

  auto train_step = [&](const Tensor& batch, std::size_t epoch) {
    const auto params = autoencoder_params(model);
    Tape tape;
    const Tensor loss = mse_loss(autoencoder_forward(batch, model, true), batch);
    const auto diverged = [&](const char* what) {
      return Error("case study (" + std::string(to_string(options.norm)) + "): " + what +
                   " at epoch " + std::to_string(epoch));
    };
    if (!std::isfinite(loss.item())) throw diverged("loss diverged");
    tape.backward(loss);
    for (const Tensor* p : params)
      for (double g : p->grad().data())
        if (!std::isfinite(g)) throw diverged("gradient diverged");
    adamw_step(opt, params);
  };

  if (options.batch_size == 0) {
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) train_step(x, epoch);
    report.epochs = options.epochs;
    report.steps = options.epochs;
  } else {
    const std::size_t per_epoch = options.n_points / options.batch_size;
    const std::size_t warmup = options.total_steps / 10;
    std::size_t step = 0;
    std::size_t epoch = 0;
    while (step < options.total_steps) {
      const auto order = batch_rng.permutation(options.n_points);
      for (std::size_t b = 0; b < per_epoch && step < options.total_steps; ++b) {
        opt.lr = cosine_lr(step + 1, warmup, options.total_steps + 1, options.lr);
        const std::span<const std::size_t> idx(order.data() + b * options.batch_size,
                                               options.batch_size);
        train_step(rows_of(x, idx), epoch);
        ++step;
      }
      ++epoch;
    }
    report.epochs = epoch;
    report.steps = step;
  }
  evaluate(x, model, report);
  return report;
}

std::vector<CaseStudyReport> batch_size_sweep(const std::vector<NormKind>& norms,
                                              const std::vector<std::size_t>& batch_sizes,
                                              const CaseStudyOptions& base, std::size_t jobs) {
  std::vector<CaseStudyOptions> runs;
  for (NormKind norm : norms)
    for (std::size_t bs : batch_sizes) {
      CaseStudyOptions o = base;
      o.norm = norm;
      o.batch_size = bs;
      check_options(o);
      runs.push_back(o);
    }

  std::vector<CaseStudyReport> reports(runs.size());
  std::vector<std::exception_ptr> errors(runs.size());
  jobs = std::max<std::size_t>(1, std::min(jobs, runs.size()));
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < runs.size(); i += jobs) {
        try {
          reports[i] = case_study_autoencoder(runs[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return reports;
}

CsvTable case_study_table(const std::vector<CaseStudyReport>& reports) {
  CsvTable t;
  t.header = {"norm", "seed", "mse", "radial_mse"};
  for (const auto& r : reports) {
    t.rows.push_back({std::string(to_string(r.norm)), std::to_string(r.seed), format_double(r.mse),
                      format_double(r.radial_mse)});
  }
  return t;
}

CsvTable batch_sweep_table(const std::vector<CaseStudyReport>& reports) {
  CsvTable t;
  t.header = {"norm", "batch_size", "steps", "mse", "radial_mse"};
  for (const auto& r : reports) {
    t.rows.push_back({std::string(to_string(r.norm)), std::to_string(r.batch_size),
                      std::to_string(r.steps), format_double(r.mse), format_double(r.radial_mse)});
  }
  return t;
}

}  // namespace ppgt
