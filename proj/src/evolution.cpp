#include "criticalwave/evolution.hpp"

#include "criticalwave/radial_spectral.hpp"
#include "criticalwave/text_format.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace criticalwave {

namespace {

constexpr Complex kI(0.0, 1.0);

// |u|^{4/d} without pow for the common dimensions.
double modulus_power(double abs2, int d)
{
    switch (d) {
    case 1: return abs2 * abs2;
    case 2: return abs2;
    case 4: return std::sqrt(abs2);
    default: return std::pow(abs2, 2.0 / d);
    }
}

double kinetic_from_spectrum(const RadialGrid& g, const std::vector<Complex>& spec)
{
    const auto k = g.k_nodes();
    const auto w = g.k_measure();
    double s = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i)
        s += k[i] * k[i] * std::norm(spec[i]) * w[i];
    return g.sphere_factor() * s;
}

double tail_from_spectrum(const RadialGrid& g, const std::vector<Complex>& spec, double k_cut)
{
    const auto k = g.k_nodes();
    const auto w = g.k_measure();
    double tail = 0.0, total = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i) {
        const double m = std::norm(spec[i]) * w[i];
        total += m;
        if (k[i] > k_cut)
            tail += m;
    }
    return total > 0.0 ? tail / total : 0.0;
}

} // namespace

std::string to_string(Termination termination)
{
    switch (termination) {
    case Termination::completed: return "completed";
    case Termination::blowup_guard: return "blowup_guard";
    default: return "resolution_guard";
    }
}

double default_time_step(const RadialGrid& grid) { return 0.5 * std::numbers::pi / (grid.k_max() * grid.k_max()); }

void SimulationConfig::validate(const RadialGrid& grid) const
{
    if (params.dimension != grid.dimension())
        throw std::invalid_argument("simulation: equation dimension differs from the grid dimension");
    if (params.mu < -1 || params.mu > 1)
        throw std::invalid_argument("simulation: mu must be -1, 0 or 1");
    if (!(dt >= 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("simulation: dt must be positive (or 0 for the default)");
    if (!(t1 > t0) || !std::isfinite(t0) || !std::isfinite(t1))
        throw std::invalid_argument("simulation: need t0 < t1");
    if (record_stride < 1 || snapshot_stride < 0)
        throw std::invalid_argument("simulation: record_stride must be >= 1 and snapshot_stride >= 0");
    if (!(gradient_cap > 0.0) || !(tail_cap > 0.0) || !(boundary_cap > 0.0))
        throw std::invalid_argument("simulation: guard caps must be positive");
    if (!(eta > 0.0 && eta < 1.0))
        throw std::invalid_argument("simulation: eta must lie in (0, 1)");
    if (!(virial_radius >= 0.0))
        throw std::invalid_argument("simulation: virial_radius must be nonnegative");
}

std::vector<double> Trajectory::times() const
{
    std::vector<double> t;
    t.reserve(records.size());
    for (const auto& r : records)
        t.push_back(r.t);
    return t;
}

const Snapshot* Trajectory::snapshot_at(double t) const
{
    for (const auto& s : snapshots)
        if (std::abs(s.t - t) <= 1e-9 * dt)
            return &s;
    return nullptr;
}

RadialField nonlinearity(const RadialField& f, const EquationParams& params)
{
    RadialField out(f.grid);
    const int d = params.dimension;
    for (int i = 0; i < f.size(); ++i)
        out.values[i] = static_cast<double>(params.mu) * modulus_power(std::norm(f.values[i]), d) * f.values[i];
    return out;
}

RadialField step(const RadialField& u, double dt, const EquationParams& params)
{
    const auto& g = *u.grid;
    const auto k = g.k_nodes();
    const int n = g.size();
    const int d = params.dimension;
    std::vector<Complex> spec(n);
    RadialField v(u.grid);
    g.stepping_forward(u.values, spec);
    for (int i = 0; i < n; ++i)
        spec[i] *= std::polar(1.0, -0.5 * dt * k[i] * k[i]);
    g.stepping_inverse(spec, v.values);
    for (auto& x : v.values)
        x *= std::polar(1.0, -params.mu * modulus_power(std::norm(x), d) * dt);
    g.stepping_forward(v.values, spec);
    for (int i = 0; i < n; ++i)
        spec[i] *= std::polar(1.0, -0.5 * dt * k[i] * k[i]);
    g.stepping_inverse(spec, v.values);
    return v;
}

Trajectory evolve(const RadialField& u0, const SimulationConfig& config)
{
    const auto& g = *u0.grid;
    config.validate(g);
    require_decay(u0, "evolve");

    const double span = config.t1 - config.t0;
    const double target_dt = config.dt > 0.0 ? config.dt : default_time_step(g);
    const long n_steps = std::max(1L, static_cast<long>(std::ceil(span / target_dt * (1.0 - 1e-12))));
    const double dt = span / n_steps;
    const int d = g.dimension();
    const int n = g.size();
    const double p = 2.0 + 4.0 / d;
    const double mu = config.params.mu;

    Trajectory traj;
    traj.params = config.params;
    traj.grid = u0.grid;
    traj.dt = dt;

    const auto k = g.k_nodes();
    std::vector<Complex> half(n);
    for (int i = 0; i < n; ++i)
        half[i] = std::polar(1.0, -0.5 * dt * k[i] * k[i]);

    std::vector<Complex> spec(n), phys(n);
    g.stepping_forward(u0.values, spec);

    const double k_cut = 0.9 * resolved_k_max(g);
    const double grad0 = std::sqrt(kinetic_from_spectrum(g, spec));
    const auto r = g.r_nodes();
    const auto rw = g.r_measure();
    int outer = n;
    while (outer > 0 && r[outer - 1] > 0.95 * g.r_max())
        --outer;

    const bool virial_on = config.virial_radius > 0.0;
    const VirialCutoff cutoff = std::isinf(config.virial_radius) ? VirialCutoff::unit() : VirialCutoff::smooth();

    double spacetime = 0.0;
    double mass0 = 0.0, energy0 = 0.0, energy_scale = 1.0;

    const auto record = [&](double t, const RadialField& u) {
        DiagnosticRecord rec;
        rec.t = t;
        rec.mass = mass(u);
        const double kinetic = kinetic_from_spectrum(g, spec);
        rec.grad_norm = std::sqrt(kinetic);
        rec.energy = 0.5 * kinetic + (mu == 0 ? 0.0 : mu * d / (2.0 * (d + 2.0)) * lp_integral(u, p));
        const auto ap = frequency_scale(u, config.eta);
        rec.N_t = ap.N_of_t;
        rec.C_eta = ap.C_of_eta;
        rec.spacetime_increment = spacetime;
        spacetime = 0.0;
        if (traj.records.empty()) {
            mass0 = rec.mass;
            energy0 = rec.energy;
            energy_scale = std::max(std::abs(energy0), 0.5 * kinetic);
        }
        traj.mass_drift = std::max(traj.mass_drift, std::abs(rec.mass - mass0) / mass0);
        traj.energy_drift = std::max(traj.energy_drift, std::abs(rec.energy - energy0) / energy_scale);
        traj.records.push_back(rec);
        if (virial_on) {
            auto v = virial_terms(u, config.virial_radius, cutoff, config.params);
            v.t = t;
            traj.virial.push_back(v);
        }
    };

    record(config.t0, u0);
    if (config.snapshot_stride > 0)
        traj.snapshots.push_back({config.t0, u0});

    for (long s = 1; s <= n_steps; ++s) {
        for (int i = 0; i < n; ++i)
            spec[i] *= half[i];
        g.stepping_inverse(spec, phys);
        double lp = 0.0, edge = 0.0, total = 0.0;
        bool finite = true;
        for (int i = 0; i < n; ++i) {
            const double a2 = std::norm(phys[i]);
            finite = finite && std::isfinite(a2);
            lp += std::pow(a2, 0.5 * p) * rw[i];
            total += a2 * rw[i];
            if (i >= outer)
                edge += a2 * rw[i];
            if (mu != 0)
                phys[i] *= std::polar(1.0, -mu * modulus_power(a2, d) * dt);
        }
        spacetime += dt * g.sphere_factor() * lp;
        g.stepping_forward(phys, spec);
        for (int i = 0; i < n; ++i)
            spec[i] *= half[i];
        traj.steps = s;
        const double t = s == n_steps ? config.t1 : config.t0 + s * dt;

        std::string reason;
        Termination verdict = Termination::completed;
        if (!finite) {
            verdict = Termination::resolution_guard;
            reason = "non-finite field values";
        } else if (std::sqrt(kinetic_from_spectrum(g, spec)) > config.gradient_cap * grad0) {
            verdict = Termination::blowup_guard;
            reason = "gradient norm exceeded cap";
        } else if (tail_from_spectrum(g, spec, k_cut) > config.tail_cap) {
            verdict = Termination::blowup_guard;
            reason = "spectral mass near the grid cutoff exceeded cap";
        } else if (edge > config.boundary_cap * total) {
            verdict = Termination::resolution_guard;
            reason = "mass reached the edge of the box";
        }

        const bool last = s == n_steps || verdict != Termination::completed;
        const bool want_record = last || s % config.record_stride == 0;
        const bool want_snapshot = config.snapshot_stride > 0 && (s % config.snapshot_stride == 0 || last);
        if (want_record || want_snapshot) {
            RadialField u(u0.grid);
            g.stepping_inverse(spec, u.values);
            if (want_record && finite)
                record(t, u);
            if (want_snapshot)
                traj.snapshots.push_back({t, std::move(u)});
        }
        if (verdict != Termination::completed) {
            traj.termination = verdict;
            traj.guard_reason = reason;
            traj.blowup_time = t;
            break;
        }
    }
    if (virial_on && traj.termination == Termination::completed && traj.virial.size() >= 5) {
        // the final record may close a shorter interval; differentiate the uniform part
        std::size_t m = traj.virial.size();
        const double h = traj.virial[1].t - traj.virial[0].t;
        if (std::abs(traj.virial[m - 1].t - traj.virial[m - 2].t - h) > 1e-9 * h)
            --m;
        differentiate_virial(std::span<VirialRecord>(traj.virial.data(), m));
    }
    return traj;
}

double duhamel_residual(const Trajectory& traj, double t0, double t1)
{
    if (!(t1 > t0))
        throw std::invalid_argument("duhamel_residual: need t0 < t1");
    std::vector<const Snapshot*> snaps;
    for (const auto& s : traj.snapshots)
        if (s.t >= t0 - 1e-9 * traj.dt && s.t <= t1 + 1e-9 * traj.dt)
            snaps.push_back(&s);
    if (!traj.snapshot_at(t0) || !traj.snapshot_at(t1) || snaps.size() < 3)
        throw std::invalid_argument("duhamel_residual: snapshots missing at the interval ends or too few inside");
    const std::size_t m = snaps.size() - 1; // intervals
    const double h = (t1 - t0) / m;
    for (std::size_t j = 0; j <= m; ++j)
        if (std::abs(snaps[j]->t - (t0 + j * h)) > 1e-6 * h)
            throw std::invalid_argument("duhamel_residual: snapshots are not uniformly spaced");

    std::vector<double> w(m + 1, 0.0);
    const std::size_t simpson = (m % 2 == 0) ? m : m - 3;
    for (std::size_t j = 0; j + 2 <= simpson; j += 2) {
        w[j] += h / 3;
        w[j + 1] += 4 * h / 3;
        w[j + 2] += h / 3;
    }
    if (simpson != m) {
        const std::size_t b = simpson;
        w[b] += 3 * h / 8;
        w[b + 1] += 9 * h / 8;
        w[b + 2] += 9 * h / 8;
        w[b + 3] += 3 * h / 8;
    }

    const auto& g = *traj.grid;
    const auto k = g.k_nodes();
    const int n = g.size();
    SpectralField acc = hankel_forward(snaps.back()->field);
    const SpectralField first = hankel_forward(snaps.front()->field);
    for (int i = 0; i < n; ++i)
        acc.values[i] -= std::polar(1.0, -(t1 - t0) * k[i] * k[i]) * first.values[i];
    for (std::size_t j = 0; j <= m; ++j) {
        const SpectralField F = hankel_forward(nonlinearity(snaps[j]->field, traj.params));
        const double lag = t1 - snaps[j]->t;
        for (int i = 0; i < n; ++i)
            acc.values[i] += kI * w[j] * std::polar(1.0, -lag * k[i] * k[i]) * F.values[i];
    }
    return std::sqrt(spectral_mass(acc));
}

namespace {

void write_le_floats(std::ofstream& out, const std::vector<Complex>& values)
{
    std::vector<char> bytes(values.size() * 8);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const float parts[2] = {static_cast<float>(values[i].real()), static_cast<float>(values[i].imag())};
        for (int c = 0; c < 2; ++c) {
            auto word = std::bit_cast<std::uint32_t>(parts[c]);
            if constexpr (std::endian::native == std::endian::big)
                word = __builtin_bswap32(word);
            std::memcpy(bytes.data() + 8 * i + 4 * c, &word, 4);
        }
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    return out;
}

} // namespace

void write_trajectory(const Trajectory& traj, const std::filesystem::path& dir, const std::string& config_echo)
{
    std::filesystem::create_directories(dir);
    const auto& g = *traj.grid;
    nlohmann::ordered_json grid = {{"dimension", g.dimension()},
                                   {"scheme", to_string(g.scheme())},
                                   {"r_max", g.r_max()},
                                   {"n", g.size()}};

    nlohmann::ordered_json manifest;
    manifest["config"] = nlohmann::ordered_json::parse(config_echo);
    manifest["grid"] = grid;
    manifest["dt"] = traj.dt;
    manifest["steps"] = traj.steps;
    manifest["termination"] = to_string(traj.termination);
    manifest["guard_reason"] = traj.guard_reason;
    manifest["blowup_time_estimate"] = traj.blowup_time ? nlohmann::ordered_json(*traj.blowup_time) : nlohmann::ordered_json();
    manifest["mass_drift"] = traj.mass_drift;
    manifest["energy_drift"] = traj.energy_drift;
    open_out(dir / "manifest.json") << manifest.dump(2) << '\n';

    auto csv = open_out(dir / "diagnostics.csv");
    csv << "t,mass,energy,grad_norm,N_t,spacetime_increment\n";
    for (const auto& r : traj.records)
        csv << fmt17(r.t) << ',' << fmt17(r.mass) << ',' << fmt17(r.energy) << ',' << fmt17(r.grad_norm) << ','
            << fmt17(r.N_t) << ',' << fmt17(r.spacetime_increment) << '\n';

    if (traj.snapshots.empty())
        return;
    const auto snap_dir = dir / "snapshots";
    std::filesystem::create_directories(snap_dir);
    nlohmann::ordered_json index;
    index["format"] = "complex64, little-endian, interleaved real/imag";
    index["grid"] = grid;
    index["snapshots"] = nlohmann::ordered_json::array();
    char name[32];
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        std::snprintf(name, sizeof name, "u_%06zu.bin", i);
        auto out = open_out(snap_dir / name);
        write_le_floats(out, traj.snapshots[i].field.values);
        index["snapshots"].push_back({{"file", name}, {"t", traj.snapshots[i].t}, {"count", traj.snapshots[i].field.size()}});
    }
    open_out(snap_dir / "index.json") << index.dump(2) << '\n';
}

std::vector<std::complex<float>> read_snapshot(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + file.string());
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() % 8 != 0)
        throw std::runtime_error("snapshot size is not a multiple of 8 bytes: " + file.string());
    std::vector<std::complex<float>> out(bytes.size() / 8);
    for (std::size_t i = 0; i < out.size(); ++i) {
        float parts[2];
        for (int c = 0; c < 2; ++c) {
            std::uint32_t word;
            std::memcpy(&word, bytes.data() + 8 * i + 4 * c, 4);
            if constexpr (std::endian::native == std::endian::big)
                word = __builtin_bswap32(word);
            parts[c] = std::bit_cast<float>(word);
        }
        out[i] = {parts[0], parts[1]};
    }
    return out;
}

} // namespace criticalwave
