#include "morphforge/toy_backends.hpp"

#include "morphforge/errors.hpp"
#include "morphforge/rng.hpp"
#include "morphforge/synth.hpp"
#include "morphforge/util.hpp"

#include <cmath>

namespace morphforge::regen {

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.normal() * scale;
    return m;
}

Eigen::VectorXd image_to_vector(const FaceImage& img) {
    return Eigen::Map<const Eigen::VectorXd>(img.pixels.data(),
                                             static_cast<Eigen::Index>(img.pixels.size()));
}

FaceImage vector_to_image(const Eigen::VectorXd& v, int size) {
    FaceImage img(size, size);
    Eigen::Map<Eigen::VectorXd>(img.pixels.data(), v.size()) = v;
    return img;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Appends M (column-major) and then the bias vector into out at offset.
template <typename Block>
void pack(Eigen::VectorXd& out, Eigen::Index& offset, const Block& block) {
    Eigen::Map<Eigen::VectorXd>(out.data() + offset, block.size()) =
        Eigen::Map<const Eigen::VectorXd>(block.data(), block.size());
    offset += block.size();
}

template <typename Block>
void unpack(const Eigen::VectorXd& in, Eigen::Index& offset, Block& block) {
    Eigen::Map<Eigen::VectorXd>(block.data(), block.size()) =
        Eigen::Map<const Eigen::VectorXd>(in.data() + offset, block.size());
    offset += block.size();
}

} // namespace

// ---------------------------------------------------------------- generator

ToyGenerator::ToyGenerator(const ToyBackendConfig& cfg, uint64_t seed_salt) : cfg_(cfg) {
    const Eigen::Index d = cfg.latent_dim;
    const Eigen::Index h = cfg.hidden_dim;
    const Eigen::Index out = static_cast<Eigen::Index>(cfg.image_size) * cfg.image_size * 3;
    Rng rng(cfg.seed * 0x2545f4914f6cdd1dull + seed_salt);
    w1_ = random_matrix(rng, h, d, 1.0 / std::sqrt(static_cast<double>(d)));
    b1_ = Eigen::VectorXd::Zero(h);
    w2_ = random_matrix(rng, out, h, 1.0 / std::sqrt(static_cast<double>(h)));
    b2_ = Eigen::VectorXd::Zero(out);
}

ToyGenerator::Forward ToyGenerator::forward(const Eigen::VectorXd& z) const {
    Forward f;
    f.hidden = (w1_ * z + b1_).array().tanh();
    Eigen::VectorXd pre = w2_ * f.hidden + b2_;
    f.pixels = pre.unaryExpr([](double v) { return sigmoid(v); });
    return f;
}

void ToyGenerator::backward(const Eigen::VectorXd& z, const Forward& f,
                            const Eigen::VectorXd& pixel_cot, Eigen::VectorXd* param_grad,
                            Eigen::VectorXd* z_grad) const {
    const Eigen::VectorXd d_pre =
        pixel_cot.array() * f.pixels.array() * (1.0 - f.pixels.array());
    const Eigen::VectorXd d_hidden_act = w2_.transpose() * d_pre;
    const Eigen::VectorXd d_hidden =
        d_hidden_act.array() * (1.0 - f.hidden.array().square());
    if (z_grad) *z_grad = w1_.transpose() * d_hidden;
    if (param_grad) {
        param_grad->resize(w1_.size() + b1_.size() + w2_.size() + b2_.size());
        Eigen::Index off = 0;
        const Eigen::MatrixXd dw1 = d_hidden * z.transpose();
        pack(*param_grad, off, dw1);
        pack(*param_grad, off, d_hidden);
        const Eigen::MatrixXd dw2 = d_pre * f.hidden.transpose();
        pack(*param_grad, off, dw2);
        pack(*param_grad, off, d_pre);
    }
}

FaceImage ToyGenerator::generate(const LatentVector& z) const {
    validate_latent(z, cfg_.latent_dim);
    return vector_to_image(forward(z.values).pixels, cfg_.image_size);
}

Eigen::VectorXd ToyGenerator::generate_vjp(const LatentVector& z,
                                           const Eigen::VectorXd& image_cotangent) const {
    validate_latent(z, cfg_.latent_dim);
    const Forward f = forward(z.values);
    if (image_cotangent.size() != f.pixels.size())
        throw BackendError("generate_vjp: cotangent length mismatch");
    Eigen::VectorXd z_grad;
    backward(z.values, f, image_cotangent, nullptr, &z_grad);
    return z_grad;
}

std::string ToyGenerator::parameter_digest() const {
    const Eigen::VectorXd theta = parameters();
    return digest_string(fnv1a64(std::span<const double>(theta.data(),
                                                         static_cast<size_t>(theta.size()))));
}

Eigen::VectorXd ToyGenerator::parameters() const {
    Eigen::VectorXd theta(w1_.size() + b1_.size() + w2_.size() + b2_.size());
    Eigen::Index off = 0;
    pack(theta, off, w1_);
    pack(theta, off, b1_);
    pack(theta, off, w2_);
    pack(theta, off, b2_);
    return theta;
}

void ToyGenerator::set_parameters(const Eigen::VectorXd& theta) {
    Eigen::Index off = 0;
    unpack(theta, off, w1_);
    unpack(theta, off, b1_);
    unpack(theta, off, w2_);
    unpack(theta, off, b2_);
}

// ------------------------------------------------------------------ encoder

ToyEncoder::ToyEncoder(const ToyBackendConfig& cfg, uint64_t seed_salt) : cfg_(cfg) {
    const Eigen::Index d = cfg.latent_dim;
    const Eigen::Index h = cfg.hidden_dim;
    const Eigen::Index in = static_cast<Eigen::Index>(cfg.image_size) * cfg.image_size * 3;
    Rng rng(cfg.seed * 0x9e3779b97f4a7c15ull + seed_salt);
    v1_ = random_matrix(rng, h, in, 1.0 / std::sqrt(static_cast<double>(in)));
    c1_ = Eigen::VectorXd::Zero(h);
    v2_ = random_matrix(rng, d, h, 1.0 / std::sqrt(static_cast<double>(h)));
    c2_ = Eigen::VectorXd::Zero(d);
}

ToyEncoder::Forward ToyEncoder::forward(const Eigen::VectorXd& pixels) const {
    Forward f;
    f.hidden = (v1_ * pixels + c1_).array().tanh();
    f.latent = v2_ * f.hidden + c2_;
    return f;
}

void ToyEncoder::backward(const Eigen::VectorXd& pixels, const Forward& f,
                          const Eigen::VectorXd& z_cot, Eigen::VectorXd* param_grad,
                          Eigen::VectorXd* pixel_grad) const {
    const Eigen::VectorXd d_hidden_act = v2_.transpose() * z_cot;
    const Eigen::VectorXd d_hidden = d_hidden_act.array() * (1.0 - f.hidden.array().square());
    if (pixel_grad) *pixel_grad = v1_.transpose() * d_hidden;
    if (param_grad) {
        param_grad->resize(v1_.size() + c1_.size() + v2_.size() + c2_.size());
        Eigen::Index off = 0;
        const Eigen::MatrixXd dv1 = d_hidden * pixels.transpose();
        pack(*param_grad, off, dv1);
        pack(*param_grad, off, d_hidden);
        const Eigen::MatrixXd dv2 = z_cot * f.hidden.transpose();
        pack(*param_grad, off, dv2);
        pack(*param_grad, off, z_cot);
    }
}

LatentVector ToyEncoder::encode(const FaceImage& image) const {
    if (image.width != cfg_.image_size || image.height != cfg_.image_size)
        throw BackendError("encoder input must be " + std::to_string(cfg_.image_size) + "x" +
                           std::to_string(cfg_.image_size) + ", got " +
                           std::to_string(image.width) + "x" + std::to_string(image.height));
    return LatentVector(forward(image_to_vector(image)).latent);
}

Eigen::VectorXd ToyEncoder::parameters() const {
    Eigen::VectorXd theta(v1_.size() + c1_.size() + v2_.size() + c2_.size());
    Eigen::Index off = 0;
    pack(theta, off, v1_);
    pack(theta, off, c1_);
    pack(theta, off, v2_);
    pack(theta, off, c2_);
    return theta;
}

void ToyEncoder::set_parameters(const Eigen::VectorXd& theta) {
    Eigen::Index off = 0;
    unpack(theta, off, v1_);
    unpack(theta, off, c1_);
    unpack(theta, off, v2_);
    unpack(theta, off, c2_);
}

Eigen::VectorXd ToyEncoder::parameter_vjp(const FaceImage& image,
                                          const Eigen::VectorXd& z_cotangent) const {
    const Eigen::VectorXd pixels = image_to_vector(image);
    const Forward f = forward(pixels);
    Eigen::VectorXd grad;
    backward(pixels, f, z_cotangent, &grad, nullptr);
    return grad;
}

// --------------------------------------------------------------- perceptual

ToyPerceptual::ToyPerceptual(int image_size, uint64_t seed) : size_(image_size) {
    Rng rng(seed * 0xd1342543de82ef95ull + 0x1234ull);
    const int channels[4] = {3, 6, 6, 4};
    int s = image_size;
    for (int l = 0; l < 3; ++l) {
        Layer layer;
        layer.in_ch = channels[l];
        layer.out_ch = channels[l + 1];
        layer.in_size = s;
        layer.out_size = (s + 1) / 2;
        const double scale = 1.0 / std::sqrt(9.0 * layer.in_ch);
        layer.weights.resize(static_cast<size_t>(layer.out_ch) * layer.in_ch * 9);
        for (auto& w : layer.weights) w = rng.normal() * scale;
        layer.bias.resize(static_cast<size_t>(layer.out_ch));
        for (auto& b : layer.bias) b = rng.normal() * 0.1;
        layers_.push_back(std::move(layer));
        s = layer.out_size;
    }
}

Eigen::Index ToyPerceptual::feature_length() const {
    const Layer& last = layers_.back();
    return static_cast<Eigen::Index>(last.out_ch) * last.out_size * last.out_size;
}

namespace {

/// 3x3 stride-2 zero-padded convolution + tanh. Planes are [c][y][x].
std::vector<double> conv_forward(const ToyPerceptual& /*unused*/, const std::vector<double>& in,
                                 int in_ch, int in_size, int out_ch, int out_size,
                                 const std::vector<double>& weights,
                                 const std::vector<double>& bias) {
    std::vector<double> out(static_cast<size_t>(out_ch) * out_size * out_size);
    for (int o = 0; o < out_ch; ++o) {
        for (int y = 0; y < out_size; ++y) {
            for (int x = 0; x < out_size; ++x) {
                double acc = bias[static_cast<size_t>(o)];
                for (int ci = 0; ci < in_ch; ++ci) {
                    for (int ky = 0; ky < 3; ++ky) {
                        const int iy = 2 * y + ky - 1;
                        if (iy < 0 || iy >= in_size) continue;
                        for (int kx = 0; kx < 3; ++kx) {
                            const int ix = 2 * x + kx - 1;
                            if (ix < 0 || ix >= in_size) continue;
                            const double w =
                                weights[((static_cast<size_t>(o) * in_ch + ci) * 3 + ky) * 3 + kx];
                            acc += w * in[(static_cast<size_t>(ci) * in_size + iy) * in_size + ix];
                        }
                    }
                }
                out[(static_cast<size_t>(o) * out_size + y) * out_size + x] = std::tanh(acc);
            }
        }
    }
    return out;
}

} // namespace

std::vector<std::vector<double>> ToyPerceptual::forward_planes(const FaceImage& image) const {
    if (image.width != size_ || image.height != size_)
        throw BackendError("perceptual input must be " + std::to_string(size_) + "x" +
                           std::to_string(size_) + ", got " + std::to_string(image.width) + "x" +
                           std::to_string(image.height));
    std::vector<std::vector<double>> acts;
    // interleaved -> planar
    std::vector<double> planes(static_cast<size_t>(3) * size_ * size_);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < size_; ++y)
            for (int x = 0; x < size_; ++x)
                planes[(static_cast<size_t>(c) * size_ + y) * size_ + x] = image.at(x, y, c);
    acts.push_back(std::move(planes));
    for (const Layer& l : layers_) {
        acts.push_back(conv_forward(*this, acts.back(), l.in_ch, l.in_size, l.out_ch, l.out_size,
                                    l.weights, l.bias));
    }
    return acts;
}

Eigen::VectorXd ToyPerceptual::features(const FaceImage& image) const {
    const auto acts = forward_planes(image);
    const auto& last = acts.back();
    return Eigen::Map<const Eigen::VectorXd>(last.data(), static_cast<Eigen::Index>(last.size()));
}

Eigen::VectorXd ToyPerceptual::features_vjp(const FaceImage& image,
                                            const Eigen::VectorXd& feature_cotangent) const {
    const auto acts = forward_planes(image);
    if (feature_cotangent.size() != static_cast<Eigen::Index>(acts.back().size()))
        throw BackendError("features_vjp: cotangent length mismatch");

    std::vector<double> cot(acts.back().size());
    for (size_t i = 0; i < cot.size(); ++i) cot[i] = feature_cotangent(static_cast<Eigen::Index>(i));

    for (size_t li = layers_.size(); li-- > 0;) {
        const Layer& l = layers_[li];
        const auto& out_act = acts[li + 1];
        std::vector<double> in_cot(static_cast<size_t>(l.in_ch) * l.in_size * l.in_size, 0.0);
        for (int o = 0; o < l.out_ch; ++o) {
            for (int y = 0; y < l.out_size; ++y) {
                for (int x = 0; x < l.out_size; ++x) {
                    const size_t oi = (static_cast<size_t>(o) * l.out_size + y) * l.out_size + x;
                    const double t = out_act[oi];
                    const double d_pre = cot[oi] * (1.0 - t * t);
                    if (d_pre == 0.0) continue;
                    for (int ci = 0; ci < l.in_ch; ++ci) {
                        for (int ky = 0; ky < 3; ++ky) {
                            const int iy = 2 * y + ky - 1;
                            if (iy < 0 || iy >= l.in_size) continue;
                            for (int kx = 0; kx < 3; ++kx) {
                                const int ix = 2 * x + kx - 1;
                                if (ix < 0 || ix >= l.in_size) continue;
                                const double w =
                                    l.weights[((static_cast<size_t>(o) * l.in_ch + ci) * 3 + ky) *
                                                  3 +
                                              kx];
                                in_cot[(static_cast<size_t>(ci) * l.in_size + iy) * l.in_size +
                                       ix] += w * d_pre;
                            }
                        }
                    }
                }
            }
        }
        cot = std::move(in_cot);
    }

    // planar cotangent -> interleaved pixel layout
    Eigen::VectorXd out(static_cast<Eigen::Index>(3) * size_ * size_);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < size_; ++y)
            for (int x = 0; x < size_; ++x)
                out((static_cast<Eigen::Index>(y) * size_ + x) * 3 + c) =
                    cot[(static_cast<size_t>(c) * size_ + y) * size_ + x];
    return out;
}

// ------------------------------------------------------------- construction

namespace {

/// Joint autoencoder fit (Adam, full batch) of encoder+generator on the
/// sprite set, minimizing pixel MSE of gen(enc(x)) against x.
void fit_autoencoder(ToyEncoder& enc, ToyGenerator& gen, const std::vector<FaceImage>& sprites,
                     int steps) {
    if (steps <= 0 || sprites.empty()) return;

    std::vector<Eigen::VectorXd> xs;
    xs.reserve(sprites.size());
    for (const auto& img : sprites) xs.push_back(image_to_vector(img));

    Eigen::VectorXd theta_e = enc.parameters();
    Eigen::VectorXd theta_g = gen.parameters();
    Eigen::VectorXd me = Eigen::VectorXd::Zero(theta_e.size());
    Eigen::VectorXd ve = Eigen::VectorXd::Zero(theta_e.size());
    Eigen::VectorXd mg = Eigen::VectorXd::Zero(theta_g.size());
    Eigen::VectorXd vg = Eigen::VectorXd::Zero(theta_g.size());
    const double lr = 0.02, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

    for (int step = 1; step <= steps; ++step) {
        Eigen::VectorXd ge = Eigen::VectorXd::Zero(theta_e.size());
        Eigen::VectorXd gg = Eigen::VectorXd::Zero(theta_g.size());
        const double inv = 1.0 / static_cast<double>(xs.size());
        for (const auto& x : xs) {
            const ToyEncoder::Forward fe = enc.forward(x);
            const ToyGenerator::Forward fg = gen.forward(fe.latent);
            // d/dpix of mean((pix - x)^2) over this image
            const Eigen::VectorXd pix_cot =
                2.0 * (fg.pixels - x) / static_cast<double>(x.size());
            Eigen::VectorXd gg_i, z_cot;
            gen.backward(fe.latent, fg, pix_cot, &gg_i, &z_cot);
            Eigen::VectorXd ge_i;
            enc.backward(x, fe, z_cot, &ge_i, nullptr);
            ge += inv * ge_i;
            gg += inv * gg_i;
        }
        const double bc1 = 1.0 - std::pow(beta1, step);
        const double bc2 = 1.0 - std::pow(beta2, step);
        auto adam = [&](Eigen::VectorXd& theta, Eigen::VectorXd& m, Eigen::VectorXd& v,
                        const Eigen::VectorXd& g) {
            m = beta1 * m + (1.0 - beta1) * g;
            v = beta2 * v.array().matrix() + (1.0 - beta2) * g.array().square().matrix();
            theta -= lr * ((m / bc1).array() / ((v / bc2).array().sqrt() + eps)).matrix();
        };
        adam(theta_e, me, ve, ge);
        adam(theta_g, mg, vg, gg);
        enc.set_parameters(theta_e);
        gen.set_parameters(theta_g);
    }
}

} // namespace

Backends make_toy_backends(const ToyBackendConfig& cfg) {
    if (cfg.image_size < 8) throw ValidationError("toy image size must be >= 8");
    if (cfg.latent_dim < 1 || cfg.hidden_dim < cfg.latent_dim)
        throw ValidationError("toy backend needs hidden_dim >= latent_dim >= 1");

    auto gen = std::make_shared<ToyGenerator>(cfg, 0xa1ull);
    auto enc = std::make_shared<ToyEncoder>(cfg, 0xb2ull);
    const auto sprites = synth::sprite_training_set(cfg.image_size, cfg.sprite_count,
                                                    cfg.seed * 31 + 5);
    fit_autoencoder(*enc, *gen, sprites, cfg.train_steps);

    Backends b;
    b.generator = gen;
    b.encoder = enc;
    b.perceptual = std::make_shared<ToyPerceptual>(cfg.image_size, cfg.seed);
    return b;
}

} // namespace morphforge::regen
