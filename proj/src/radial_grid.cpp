#include "criticalwave/radial_grid.hpp"

#include "criticalwave/special_functions.hpp"

#include <Eigen/Dense>
#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace criticalwave {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kMaxPanelOrder = 256;

std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

using RowPairs = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

Eigen::Map<const RowPairs> as_pairs(std::span<const Complex> v)
{
    return {reinterpret_cast<const double*>(v.data()), static_cast<Eigen::Index>(v.size()), 2};
}

Eigen::Map<RowPairs> as_pairs(std::span<Complex> v)
{
    return {reinterpret_cast<double*>(v.data()), static_cast<Eigen::Index>(v.size()), 2};
}

int choose_panel_order(int n)
{
    if (n <= kMaxPanelOrder)
        return n;
    for (int order = kMaxPanelOrder; order >= kMaxPanelOrder / 2; --order)
        if (n % order == 0)
            return order;
    return n;
}

} // namespace

GridScheme parse_grid_scheme(const std::string& name)
{
    if (name == "dense")
        return GridScheme::dense;
    if (name == "sine")
        return GridScheme::sine;
    throw std::invalid_argument("unknown grid scheme '" + name + "' (expected dense or sine)");
}

std::string to_string(GridScheme scheme) { return scheme == GridScheme::dense ? "dense" : "sine"; }

namespace detail {

class TransformPlan
{
public:
    virtual ~TransformPlan() = default;
    virtual void forward(std::span<const Complex> in, std::span<Complex> out) const = 0;
    virtual void inverse(std::span<const Complex> in, std::span<Complex> out) const = 0;
    virtual void derivative(std::span<const Complex> in, std::span<Complex> out) const = 0;
    virtual void stepping_forward(std::span<const Complex> in, std::span<Complex> out) const { forward(in, out); }
    virtual void stepping_inverse(std::span<const Complex> in, std::span<Complex> out) const { inverse(in, out); }
};

namespace {

// Stored kernel matrices: F = T f and f = S F.
class DensePlan final : public TransformPlan
{
public:
    DensePlan(const RadialGrid& g)
    {
        const int n = g.size();
        const double nu = g.bessel_order();
        forward_.resize(n, n);
        inverse_.resize(n, n);
        const auto r = g.r_nodes();
        const auto k = g.k_nodes();
        const auto wr = g.r_measure();
        const auto wk = g.k_measure();
        nu_ = nu;
        r_.assign(r.begin(), r.end());
        k_.assign(k.begin(), k.end());
        wk_.assign(wk.begin(), wk.end());
        for (int m = 0; m < n; ++m) {
            for (int j = 0; j < n; ++j) {
                const double kernel = bessel_j_scaled(nu, k[m] * r[j]);
                forward_(m, j) = kernel * wr[j];
                inverse_(j, m) = kernel * wk[m];
            }
        }
        wr_.assign(wr.begin(), wr.end());
    }

    void forward(std::span<const Complex> in, std::span<Complex> out) const override
    {
        as_pairs(out).noalias() = forward_ * as_pairs(in);
    }

    void inverse(std::span<const Complex> in, std::span<Complex> out) const override
    {
        as_pairs(out).noalias() = inverse_ * as_pairs(in);
    }

    void derivative(std::span<const Complex> in, std::span<Complex> out) const override
    {
        std::call_once(derivative_once_, [this] { build_derivative(); });
        as_pairs(out).noalias() = derivative_ * as_pairs(in);
    }

    void stepping_forward(std::span<const Complex> in, std::span<Complex> out) const override
    {
        std::call_once(unitary_once_, [this] { build_unitary(); });
        as_pairs(out).noalias() = unitary_forward_ * as_pairs(in);
    }

    void stepping_inverse(std::span<const Complex> in, std::span<Complex> out) const override
    {
        std::call_once(unitary_once_, [this] { build_unitary(); });
        as_pairs(out).noalias() = unitary_inverse_ * as_pairs(in);
    }

private:
    // The weighted kernel sqrt(wk) J sqrt(wr) is orthogonal only on the
    // resolved band; elsewhere its singular values spread over [0, 2] and
    // repeated round trips amplify them. Its polar factor is exactly orthogonal.
    void build_unitary() const
    {
        const int n = static_cast<int>(r_.size());
        Eigen::MatrixXd kernel(n, n);
        for (int m = 0; m < n; ++m)
            for (int j = 0; j < n; ++j)
                kernel(m, j) = forward_(m, j) * std::sqrt(wk_[m] / wr_[j]);
        const Eigen::BDCSVD<Eigen::MatrixXd> svd(kernel, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Eigen::MatrixXd polar = svd.matrixU() * svd.matrixV().transpose();
        unitary_forward_.resize(n, n);
        unitary_inverse_.resize(n, n);
        for (int m = 0; m < n; ++m) {
            for (int j = 0; j < n; ++j) {
                unitary_forward_(m, j) = polar(m, j) * std::sqrt(wr_[j] / wk_[m]);
                unitary_inverse_(j, m) = polar(m, j) * std::sqrt(wk_[m] / wr_[j]);
            }
        }
    }

    // d/dr [z^{-nu} J_nu(z)] = -z * (z^{-nu-1} J_{nu+1}(z)) with z = k r.
    void build_derivative() const
    {
        const int n = static_cast<int>(r_.size());
        derivative_.resize(n, n);
        for (int j = 0; j < n; ++j)
            for (int m = 0; m < n; ++m)
                derivative_(j, m) = -r_[j] * k_[m] * k_[m] * bessel_j_scaled(nu_ + 1.0, k_[m] * r_[j]) * wk_[m];
    }

    Eigen::MatrixXd forward_;
    Eigen::MatrixXd inverse_;
    double nu_ = 0.0;
    std::vector<double> r_, k_, wk_, wr_;
    mutable std::once_flag derivative_once_;
    mutable Eigen::MatrixXd derivative_;
    mutable std::once_flag unitary_once_;
    mutable Eigen::MatrixXd unitary_forward_;
    mutable Eigen::MatrixXd unitary_inverse_;
};

// DST-I based transform for d = 3 on r_j = j h, k_m = m pi / r_max.
class SinePlan final : public TransformPlan
{
public:
    SinePlan(const RadialGrid& g)
        : n_(g.size()), r_(g.r_nodes().begin(), g.r_nodes().end()), k_(g.k_nodes().begin(), g.k_nodes().end())
    {
        h_ = g.r_weights()[0];
        dk_ = g.k_weights()[0];
        std::lock_guard lock(fftw_planner_mutex());
        double* a = fftw_alloc_real(n_);
        double* b = fftw_alloc_real(n_);
        plan_ = fftw_plan_r2r_1d(n_, a, b, FFTW_RODFT00, FFTW_ESTIMATE);
        fftw_free(a);
        fftw_free(b);
        a = fftw_alloc_real(n_ + 2);
        b = fftw_alloc_real(n_ + 2);
        cosine_plan_ = fftw_plan_r2r_1d(n_ + 2, a, b, FFTW_REDFT00, FFTW_ESTIMATE);
        fftw_free(a);
        fftw_free(b);
    }

    ~SinePlan() override
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(plan_);
        fftw_destroy_plan(cosine_plan_);
    }

    void forward(std::span<const Complex> in, std::span<Complex> out) const override
    {
        // F(k_m) = sqrt(2/pi) h / k_m * sum_j sin(k_m r_j) r_j f_j
        run(in, out, r_, k_, std::sqrt(2.0 / kPi) * h_);
    }

    void inverse(std::span<const Complex> in, std::span<Complex> out) const override
    {
        run(in, out, k_, r_, std::sqrt(2.0 / kPi) * dk_);
    }

    // f'(r) = sqrt(2/pi) dk / r * sum_m cos(k_m r) k_m^2 F_m - f(r) / r
    void derivative(std::span<const Complex> in, std::span<Complex> out) const override
    {
        std::vector<Complex> f(n_);
        inverse(in, f);
        double* buf[4];
        for (auto& p : buf)
            p = fftw_alloc_real(n_ + 2);
        buf[0][0] = buf[0][n_ + 1] = buf[1][0] = buf[1][n_ + 1] = 0.0;
        for (int m = 0; m < n_; ++m) {
            buf[0][m + 1] = in[m].real() * k_[m] * k_[m];
            buf[1][m + 1] = in[m].imag() * k_[m] * k_[m];
        }
        fftw_execute_r2r(cosine_plan_, buf[0], buf[2]);
        fftw_execute_r2r(cosine_plan_, buf[1], buf[3]);
        const double scale = std::sqrt(2.0 / kPi) * dk_;
        for (int j = 0; j < n_; ++j) {
            const Complex c(buf[2][j + 1], buf[3][j + 1]);
            out[j] = (0.5 * scale * c - f[j]) / r_[j];
        }
        for (auto* p : buf)
            fftw_free(p);
    }

private:
    void run(std::span<const Complex> in, std::span<Complex> out, const std::vector<double>& src_nodes,
             const std::vector<double>& dst_nodes, double scale) const
    {
        double* re_in = fftw_alloc_real(n_);
        double* im_in = fftw_alloc_real(n_);
        double* re_out = fftw_alloc_real(n_);
        double* im_out = fftw_alloc_real(n_);
        for (int j = 0; j < n_; ++j) {
            re_in[j] = in[j].real() * src_nodes[j];
            im_in[j] = in[j].imag() * src_nodes[j];
        }
        fftw_execute_r2r(plan_, re_in, re_out);
        fftw_execute_r2r(plan_, im_in, im_out);
        for (int m = 0; m < n_; ++m) {
            const double c = 0.5 * scale / dst_nodes[m];
            out[m] = Complex(re_out[m] * c, im_out[m] * c);
        }
        fftw_free(re_in);
        fftw_free(im_in);
        fftw_free(re_out);
        fftw_free(im_out);
    }

    int n_;
    std::vector<double> r_, k_;
    double h_ = 0.0;
    double dk_ = 0.0;
    fftw_plan plan_ = nullptr;
    fftw_plan cosine_plan_ = nullptr;
};

} // namespace
} // namespace detail

RadialGrid::~RadialGrid() = default;

std::shared_ptr<const RadialGrid> RadialGrid::make(int dimension, double r_max, int n, GridScheme scheme)
{
    if (dimension < 1)
        throw std::invalid_argument("grid dimension must be >= 1");
    if (n < 16)
        throw std::invalid_argument("grid needs at least 16 nodes");
    if (!(r_max > 0.0) || !std::isfinite(r_max))
        throw std::invalid_argument("r_max must be positive and finite");
    if (scheme == GridScheme::sine && dimension != 3)
        throw std::invalid_argument("the sine scheme requires dimension 3");

    std::shared_ptr<RadialGrid> g(new RadialGrid());
    g->dimension_ = dimension;
    g->scheme_ = scheme;
    g->r_max_ = r_max;
    g->k_max_ = kPi * n / r_max;
    g->sphere_factor_ = 2.0 * std::pow(kPi, 0.5 * dimension) / std::tgamma(0.5 * dimension);

    if (scheme == GridScheme::sine) {
        const double h = r_max / (n + 1);
        const double dk = kPi / r_max;
        for (int j = 1; j <= n; ++j) {
            g->r_nodes_.push_back(j * h);
            g->r_weights_.push_back(h);
            g->k_nodes_.push_back(j * dk);
            g->k_weights_.push_back(dk);
        }
        g->panel_count_ = 1;
        g->panel_order_ = n;
    } else {
        const int order = choose_panel_order(n);
        const int panels = n / order;
        const QuadratureRule rr = composite_gauss(0.0, r_max, panels, order);
        const QuadratureRule kk = composite_gauss(0.0, g->k_max_, panels, order);
        g->r_nodes_ = rr.nodes;
        g->r_weights_ = rr.weights;
        g->k_nodes_ = kk.nodes;
        g->k_weights_ = kk.weights;
        g->panel_count_ = panels;
        g->panel_order_ = order;
        g->panel_barycentric_ = legendre_barycentric_weights(gauss_legendre(order));
    }

    const double power = dimension - 1.0;
    for (int j = 0; j < n; ++j) {
        g->r_measure_.push_back(g->r_weights_[j] * std::pow(g->r_nodes_[j], power));
        g->k_measure_.push_back(g->k_weights_[j] * std::pow(g->k_nodes_[j], power));
    }

    if (scheme == GridScheme::sine)
        g->plan_ = std::make_unique<detail::SinePlan>(*g);
    else
        g->plan_ = std::make_unique<detail::DensePlan>(*g);
    return g;
}

GridPtr make_grid(int dimension, double r_max, int n, GridScheme scheme)
{
    return RadialGrid::make(dimension, r_max, n, scheme);
}

void RadialGrid::forward(std::span<const Complex> in, std::span<Complex> out) const
{
    if (static_cast<int>(in.size()) != size() || static_cast<int>(out.size()) != size())
        throw std::invalid_argument("transform size does not match grid");
    plan_->forward(in, out);
}

void RadialGrid::inverse(std::span<const Complex> in, std::span<Complex> out) const
{
    if (static_cast<int>(in.size()) != size() || static_cast<int>(out.size()) != size())
        throw std::invalid_argument("transform size does not match grid");
    plan_->inverse(in, out);
}

void RadialGrid::stepping_forward(std::span<const Complex> in, std::span<Complex> out) const
{
    if (static_cast<int>(in.size()) != size() || static_cast<int>(out.size()) != size())
        throw std::invalid_argument("transform size does not match grid");
    plan_->stepping_forward(in, out);
}

void RadialGrid::stepping_inverse(std::span<const Complex> in, std::span<Complex> out) const
{
    if (static_cast<int>(in.size()) != size() || static_cast<int>(out.size()) != size())
        throw std::invalid_argument("transform size does not match grid");
    plan_->stepping_inverse(in, out);
}

void RadialGrid::radial_derivative(std::span<const Complex> spectrum, std::span<Complex> out) const
{
    if (static_cast<int>(spectrum.size()) != size() || static_cast<int>(out.size()) != size())
        throw std::invalid_argument("derivative size does not match grid");
    plan_->derivative(spectrum, out);
}

Complex RadialGrid::forward_at(std::span<const Complex> values, double k) const
{
    const double nu = bessel_order();
    Complex sum = 0.0;
    for (int j = 0; j < size(); ++j)
        sum += bessel_j_scaled(nu, k * r_nodes_[j]) * r_measure_[j] * values[j];
    return sum;
}

Complex RadialGrid::inverse_at(std::span<const Complex> spectrum, double r) const
{
    const double nu = bessel_order();
    Complex sum = 0.0;
    for (int m = 0; m < size(); ++m)
        sum += bessel_j_scaled(nu, k_nodes_[m] * r) * k_measure_[m] * spectrum[m];
    return sum;
}

std::vector<Complex> RadialGrid::interpolate(std::span<const Complex> values, std::span<const double> radii) const
{
    if (static_cast<int>(values.size()) != size())
        throw std::invalid_argument("interpolate: sample count does not match grid");
    std::vector<Complex> out(radii.size());
    if (scheme_ == GridScheme::sine) {
        std::vector<Complex> spectrum(values.size());
        forward(values, spectrum);
        for (std::size_t i = 0; i < radii.size(); ++i)
            out[i] = (radii[i] >= r_max_ || radii[i] < 0.0) ? Complex{} : inverse_at(spectrum, radii[i]);
        return out;
    }
    const double width = r_max_ / panel_count_;
    for (std::size_t i = 0; i < radii.size(); ++i) {
        const double r = radii[i];
        if (r > r_max_ || r < 0.0) {
            out[i] = Complex{};
            continue;
        }
        const int panel = std::min(panel_count_ - 1, static_cast<int>(r / width));
        const int offset = panel * panel_order_;
        Complex num = 0.0;
        double den = 0.0;
        bool exact = false;
        for (int j = 0; j < panel_order_; ++j) {
            const double diff = r - r_nodes_[offset + j];
            if (diff == 0.0) {
                out[i] = values[offset + j];
                exact = true;
                break;
            }
            const double c = panel_barycentric_[j] / diff;
            num += c * values[offset + j];
            den += c;
        }
        if (!exact)
            out[i] = num / den;
    }
    return out;
}

} // namespace criticalwave
