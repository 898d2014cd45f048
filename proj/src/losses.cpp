#include "hazelab/losses.hpp"

#include "hazelab/error.hpp"

namespace hazelab::losses {

namespace {

void require_same(const Image& a, const Image& b, const char* what) {
    if (!same_size(a, b)) fail(ErrorCode::Data, std::string(what) + ": shape mismatch");
}

}  // namespace

LossValue mse(const Image& a, const Image& b) {
    require_same(a, b, "mse");
    LossValue lv;
    lv.per_pixel = ScalarField(a.height, a.width);
    lv.has_per_pixel = true;
    double acc = 0.0;
    for (int y = 0; y < a.height; ++y)
        for (int x = 0; x < a.width; ++x) {
            double sq = 0.0;
            for (int c = 0; c < 3; ++c) {
                double d = double(a.at(y, x, c)) - double(b.at(y, x, c));
                sq += d * d;
            }
            lv.per_pixel.at(y, x) = float(sq / 3.0);
            acc += sq;
        }
    lv.value = acc / (3.0 * double(a.height) * a.width);
    return lv;
}

LossValue mse(const Tensor4& a, const Tensor4& b) {
    if (a.shape != b.shape) fail(ErrorCode::Data, "mse: shape mismatch");
    LossValue lv;
    lv.value = double(detail::mse_buf(a.data.data(), b.data.data(), a.numel()));
    return lv;
}

Image mse_grad(const Image& a, const Image& b) {
    require_same(a, b, "mse_grad");
    Image g(a.height, a.width);
    float scale = 2.f / float(a.data.size());
    for (size_t i = 0; i < a.data.size(); ++i) g.data[i] = scale * (a.data[i] - b.data[i]);
    return g;
}

Tensor4 mse_grad(const Tensor4& a, const Tensor4& b) {
    if (a.shape != b.shape) fail(ErrorCode::Data, "mse_grad: shape mismatch");
    Tensor4 g(a.shape[0], a.shape[1], a.shape[2], a.shape[3]);
    float scale = 2.f / float(a.numel());
    for (size_t i = 0; i < a.data.size(); ++i) g.data[i] = scale * (a.data[i] - b.data[i]);
    return g;
}

LossValue loss_j(const Image& est, const Image& gt, Space space) {
    require_same(est, gt, "loss_j");
    if (space == Space::Linear) return mse(est, gt);

    validate_image(est, "loss_j estimate");
    validate_image(gt, "loss_j ground truth");
    color::LabImage le = color::rgb_to_lab(est, color::LabMode::Simplified);
    color::LabImage lg = color::rgb_to_lab(gt, color::LabMode::Simplified);
    LossValue lv;
    lv.per_pixel = ScalarField(est.height, est.width);
    lv.has_per_pixel = true;
    double acc = 0.0;
    for (int y = 0; y < est.height; ++y)
        for (int x = 0; x < est.width; ++x) {
            size_t i = (size_t(y) * est.width + x) * 3;
            double sq = 0.0;
            for (int c = 0; c < 3; ++c) {
                double d = double(le.data[i + c]) - double(lg.data[i + c]);
                sq += d * d;
            }
            lv.per_pixel.at(y, x) = float(sq / 3.0);
            acc += sq;
        }
    lv.value = acc / (3.0 * double(est.height) * est.width);
    return lv;
}

LossValue loss_a_weighted(const haze::LightMap& est, const haze::LightMap& gt,
                          const haze::TransmissionMap& t, Space space) {
    if (est.height != gt.height || est.width != gt.width || est.height != t.height ||
        est.width != t.width)
        fail(ErrorCode::Data, "loss_a_weighted: shape mismatch");
    for (float v : t.data)
        if (!(v > 0.f)) fail(ErrorCode::Numeric, "loss_a_weighted: t must be > 0");

    LossValue lv;
    if (space == Space::Linear) {
        lv.value = double(detail::loss_a_weighted_linear_buf(
            est.data.data(), gt.data.data(), t.data.data(), est.data.size() / 3));
        return lv;
    }
    // Lab-domain variant, provided for completeness; not used in training.
    double acc = 0.0;
    size_t pixels = est.data.size() / 3;
    for (size_t p = 0; p < pixels; ++p) {
        double w = 1.0 - 1.0 / double(t.data[p]);
        double e[3] = {est.data[p * 3], est.data[p * 3 + 1], est.data[p * 3 + 2]};
        double g[3] = {gt.data[p * 3], gt.data[p * 3 + 1], gt.data[p * 3 + 2]};
        acc += w * w * detail::fwb_px<double>(e, g, 0.0, nullptr, nullptr);
    }
    lv.value = acc / (3.0 * double(pixels));
    return lv;
}

LossValue fwb_loss(const haze::LightMap& est, const haze::LightMap& gt) {
    if (est.height != gt.height || est.width != gt.width)
        fail(ErrorCode::Data, "fwb_loss: shape mismatch");
    LossValue lv;
    std::vector<double> e(est.data.begin(), est.data.end());
    std::vector<double> g(gt.data.begin(), gt.data.end());
    lv.value = detail::fwb_loss_buf<double>(e.data(), g.data(), e.size() / 3, 0.0, nullptr, nullptr);
    return lv;
}

FwbLossGrad fwb_loss_with_grad(const haze::LightMap& est, const haze::LightMap& gt,
                               double domain_floor) {
    if (est.height != gt.height || est.width != gt.width)
        fail(ErrorCode::Data, "fwb_loss_with_grad: shape mismatch");
    FwbLossGrad out;
    out.grad = haze::LightMap(est.height, est.width);
    std::vector<double> e(est.data.begin(), est.data.end());
    std::vector<double> g(gt.data.begin(), gt.data.end());
    std::vector<double> grad(e.size(), 0.0);
    out.value = detail::fwb_loss_buf<double>(e.data(), g.data(), e.size() / 3, domain_floor,
                                             &out.floored, grad.data());
    for (size_t i = 0; i < grad.size(); ++i) out.grad.data[i] = float(grad[i]);
    return out;
}

}  // namespace hazelab::losses
