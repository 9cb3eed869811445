#include "dews/edit_kernel.hpp"

#include <cmath>
#include <cstdio>

#include "dews/error.hpp"
#include "fft.hpp"

namespace dews {

namespace {

const std::vector<std::uint8_t>& labels_for(std::size_t h, std::size_t w, const BandPartition& p) {
  // Small private cache; spectral.cpp keeps its own for the public API.
  thread_local std::size_t lh = 0, lw = 0;
  thread_local BandPartition lp{};
  thread_local std::vector<std::uint8_t> labels;
  if (lh != h || lw != w || lp.f1 != p.f1 || lp.f2 != p.f2 || labels.empty()) {
    labels.resize(h * w);
    for (std::size_t ky = 0; ky < h; ++ky)
      for (std::size_t kx = 0; kx < w; ++kx)
        labels[ky * w + kx] = static_cast<std::uint8_t>(p.classify(radial_frequency(ky, kx, h, w)));
    lh = h;
    lw = w;
    lp = p;
  }
  return labels;
}

}  // namespace

std::string_view edit_mode_name(EditMode m) {
  switch (m) {
    case EditMode::LinearShrink: return "linear_shrink";
    case EditMode::Resynth: return "resynth";
    case EditMode::Identity: return "identity";
  }
  return "?";
}

EditMode parse_edit_mode(std::string_view name) {
  for (auto m : {EditMode::LinearShrink, EditMode::Resynth, EditMode::Identity})
    if (edit_mode_name(m) == name) return m;
  fail(ErrorCode::Config, "unknown edit mode '" + std::string(name) + "'");
}

std::string_view step_policy_name(StepPolicy p) {
  return p == StepPolicy::Fixed ? "fixed" : "proportional";
}

StepPolicy parse_step_policy(std::string_view name) {
  if (name == "fixed") return StepPolicy::Fixed;
  if (name == "proportional") return StepPolicy::Proportional;
  fail(ErrorCode::Config, "unknown step policy '" + std::string(name) + "'");
}

void MaskRect::validate() const {
  auto ok = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  require(ok(y0) && ok(x0) && ok(y1) && ok(x1) && y0 < y1 && x0 < x1, ErrorCode::InvalidArgument,
          "mask rect must satisfy 0 <= y0 < y1 <= 1 and 0 <= x0 < x1 <= 1");
}

Image MaskRect::rasterize(std::size_t height, std::size_t width) const {
  validate();
  Image m(height, width, 1);
  const auto r0 = static_cast<std::size_t>(std::lround(y0 * height));
  const auto r1 = static_cast<std::size_t>(std::lround(y1 * height));
  const auto c0 = static_cast<std::size_t>(std::lround(x0 * width));
  const auto c1 = static_cast<std::size_t>(std::lround(x1 * width));
  for (std::size_t y = r0; y < r1; ++y)
    for (std::size_t x = c0; x < c1; ++x) m.at(0, y, x) = 1.0;
  return m;
}

void EditConfig::validate() const {
  require(std::isfinite(t_star) && t_star >= 0.0 && t_star <= 1.0, ErrorCode::InvalidArgument,
          "edit '" + name + "': t_star must lie in [0, 1]");
  require(n_steps >= 0, ErrorCode::InvalidArgument, "edit '" + name + "': n_steps must be >= 0");
  for (double g : gains)
    require(std::isfinite(g) && g > 0.0 && g <= 1.0, ErrorCode::InvalidArgument,
            "edit '" + name + "': band gains must lie in (0, 1]");
  require(std::isfinite(anchor), ErrorCode::InvalidArgument, "edit '" + name + "': anchor must be finite");
  require(std::isfinite(kappa) && kappa >= 0.0 && kappa <= 1.0, ErrorCode::InvalidArgument,
          "edit '" + name + "': kappa must lie in [0, 1]");
  partition.validate();
  if (mask_rect) mask_rect->validate();
}

int EditConfig::realized_steps() const {
  if (step_policy == StepPolicy::Fixed) return n_steps;
  return static_cast<int>(std::lround(t_star * n_steps));
}

double EditConfig::max_gain() const { return std::max({gains[0], gains[1], gains[2]}); }

double CoupledOutcome::snr_empirical() const {
  if (noise_energy == 0.0) return signal_energy == 0.0 ? 0.0 : kInfinity;
  return signal_energy / noise_energy;
}

NoisedState forward_noise(const Image& x, const NoiseSchedule& sched, double t_star, RngStream& rng) {
  NoisedState out;
  out.start_step = sched.start_step(t_star);
  out.alpha_bar = sched.alpha_bar(out.start_step);
  if (out.start_step == 0) {
    out.image = x;
    return out;
  }
  const double a = std::sqrt(out.alpha_bar);
  const double b = std::sqrt(1.0 - out.alpha_bar);
  out.image = Image(x.height(), x.width(), x.channels());
  auto dst = out.image.data();
  auto src = x.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = a * src[i] + b * rng.normal();
  return out;
}

Image denoise_step(const Image& y, double anchor, const BandValues& gains, const BandPartition& partition) {
  Image centred = y;
  for (double& v : centred.data()) v -= anchor;
  Image out = apply_band_gains(centred, gains, partition);
  for (double& v : out.data()) v += anchor;
  return out;
}

EditOutcome reverse_process(const NoisedState& state, const EditConfig& cfg, RngStream& rng, bool keep_log) {
  cfg.validate();
  EditOutcome out;
  out.noised = state.image;
  out.alpha_bar = state.alpha_bar;
  out.start_step = state.start_step;
  if (cfg.mode == EditMode::Identity) {
    out.edited = state.image;
    return out;
  }
  const int n = cfg.realized_steps();
  out.steps = n;
  const Image& y = state.image;
  const double shift = (1.0 - std::sqrt(state.alpha_bar)) * cfg.anchor;

  if (n == 0 && cfg.mode == EditMode::LinearShrink && !keep_log) {
    out.edited = y;
    if (shift != 0.0)
      for (double& v : out.edited.data()) v += shift;
    return out;
  }

  const std::size_t h = y.height(), w = y.width(), np = y.plane_size();
  const auto& fft = detail::Fft2d::get(h, w);
  const auto& labels = labels_for(h, w, cfg.partition);
  BandValues total_gain{};
  for (int b = 0; b < 3; ++b) total_gain[b] = std::pow(cfg.gains[b], n);

  out.edited = Image(h, w, y.channels());
  std::vector<BandValues> energy0(y.channels());
  std::vector<double> centred(np), texture(np);
  detail::Spectrum spec, noise;
  for (std::size_t c = 0; c < y.channels(); ++c) {
    const auto src = y.plane(c);
    // z0 - anchor = y + shift - anchor
    for (std::size_t i = 0; i < np; ++i) centred[i] = src[i] + shift - cfg.anchor;
    fft.forward(centred, spec);
    if (keep_log) {
      energy0[c] = {};
      for (std::size_t i = 0; i < np; ++i) energy0[c][labels[i]] += std::norm(spec[i]);
    }
    for (std::size_t i = 0; i < np; ++i) spec[i] *= total_gain[labels[i]];

    if (cfg.mode == EditMode::Resynth) {
      double e_state = 0.0, e_noise = 0.0;
      rng.fill_normal(texture);
      fft.forward(texture, noise);
      for (std::size_t i = 0; i < np; ++i) {
        if (labels[i] != static_cast<std::uint8_t>(Band::High)) continue;
        e_state += std::norm(spec[i]);
        e_noise += std::norm(noise[i]);
      }
      const double scale = e_noise > 0.0 ? std::sqrt(e_state / e_noise) : 0.0;
      for (std::size_t i = 0; i < np; ++i)
        if (labels[i] == static_cast<std::uint8_t>(Band::High)) spec[i] = scale * noise[i];
    }
    auto dst = out.edited.plane(c);
    fft.inverse(spec, dst);
    for (double& v : dst) v += cfg.anchor;
  }

  if (keep_log) {
    for (int k = 0; k <= n; ++k) {
      StepRecord r;
      r.step = k;
      for (std::size_t c = 0; c < y.channels(); ++c)
        for (int b = 0; b < 3; ++b) r.energy[b] += energy0[c][b] * std::pow(cfg.gains[b], 2.0 * k);
      r.norm = std::sqrt(r.energy[0] + r.energy[1] + r.energy[2]);
      out.log.push_back(r);
    }
  }
  return out;
}

EditOutcome edit(const Image& x, const EditConfig& cfg, const NoiseSchedule& sched, RngStream& rng, bool keep_log) {
  cfg.validate();
  if (cfg.mode == EditMode::Identity) {
    EditOutcome out;
    out.edited = x;
    out.noised = x;
    return out;
  }
  Image mask;
  if (cfg.mask) {
    mask = *cfg.mask;
    const bool plane_mask = mask.height() == x.height() && mask.width() == x.width() && mask.channels() == 1;
    require(plane_mask || mask.same_shape(x), ErrorCode::ShapeMismatch,
            "edit '" + cfg.name + "': mask " + mask.shape_string() + " does not match image " + x.shape_string());
  } else if (cfg.mask_rect) {
    mask = cfg.mask_rect->rasterize(x.height(), x.width());
  }

  auto state = forward_noise(x, sched, cfg.t_star, rng);
  EditOutcome out = reverse_process(state, cfg, rng, keep_log);
  if (mask.empty()) return out;

  const std::size_t np = x.plane_size();
  auto k = out.edited.data();
  auto src = x.data();
  const auto m = mask.data();
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double mi = mask.channels() == 1 ? m[i % np] : m[i];
    k[i] = mi * k[i] + (1.0 - mi) * (src[i] + cfg.kappa * (k[i] - src[i]));
  }
  return out;
}

CoupledOutcome coupled_edit(const Image& x_w, const Image& x, const EditConfig& cfg, const NoiseSchedule& sched,
                            RngStream& rng, bool keep_log) {
  require_same_shape(x_w, x, "coupled_edit");
  CoupledOutcome out;
  RngStream shared = rng;
  out.watermarked = edit(x_w, cfg, sched, shared, keep_log);
  out.baseline = edit(x, cfg, sched, rng, keep_log);

  const double d = static_cast<double>(x.size());
  const double a = std::sqrt(out.baseline.alpha_bar);
  const auto nw = out.watermarked.noised.data();
  const auto nb = out.baseline.noised.data();
  const auto src = x.data();
  double sig = 0.0, noise = 0.0;
  for (std::size_t i = 0; i < nb.size(); ++i) {
    const double ds = nw[i] - nb[i];
    const double dn = nb[i] - a * src[i];
    sig += ds * ds;
    noise += dn * dn;
  }
  out.signal_energy = sig / d;
  out.noise_energy = noise / d;
  return out;
}

std::string step_log_csv(const std::vector<StepRecord>& log) {
  std::string out = "step,norm,energy_low,energy_mid,energy_high\n";
  char buf[160];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", r.step, r.norm, r.energy[0], r.energy[1],
                  r.energy[2]);
    out += buf;
  }
  return out;
}

void ou_simulate(std::span<double> x, const ContinuousSchedule& cs, double t_end, double dt, RngStream& rng) {
  cs.validate();
  require(std::isfinite(dt) && dt > 0.0, ErrorCode::InvalidArgument, "ou_simulate: dt must be positive");
  require(std::isfinite(t_end) && dt <= t_end / 10.0 * (1.0 + 1e-12), ErrorCode::InvalidArgument,
          "ou_simulate: dt must be at most t_end / 10");
  const auto steps = static_cast<long>(std::lround(t_end / dt));
  for (long k = 0; k < steps; ++k) {
    const double beta = cs.beta(static_cast<double>(k) * dt);
    const double drift = 1.0 - 0.5 * beta * dt;
    const double diffusion = std::sqrt(beta * dt);
    for (double& v : x) v = drift * v + diffusion * rng.normal();
  }
}

Image ou_simulate(const Image& x0, const ContinuousSchedule& cs, double t_end, double dt, RngStream& rng) {
  Image x = x0;
  ou_simulate(x.data(), cs, t_end, dt, rng);
  return x;
}

}  // namespace dews
