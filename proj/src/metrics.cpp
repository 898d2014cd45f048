#include "hazelab/metrics.hpp"

#include <array>
#include <cmath>

#include "hazelab/error.hpp"
#include "hazelab/parallel.hpp"

namespace hazelab::metrics {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kPow25_7 = 6103515625.0;  // 25^7

double deg2rad(double d) { return d * kPi / 180.0; }

}  // namespace

double psnr(const Image& a, const Image& b) {
    if (!same_size(a, b)) fail(ErrorCode::Data, "psnr: dimension mismatch");
    const int w3 = a.width * 3;
    double sq = parallel_sum(a.height, [&](int y) {
        const float* pa = a.data.data() + size_t(y) * w3;
        const float* pb = b.data.data() + size_t(y) * w3;
        double s = 0.0;
        for (int x = 0; x < w3; ++x) {
            double d = double(pa[x]) - double(pb[x]);
            s += d * d;
        }
        return s;
    });
    double mse = sq / (double(a.height) * w3);
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(mse);
}

double ssim(const Image& a, const Image& b) {
    if (!same_size(a, b)) fail(ErrorCode::Data, "ssim: dimension mismatch");
    constexpr int kWin = 11;
    constexpr double kSigma = 1.5;
    constexpr double kC1 = 0.01 * 0.01;  // (K1 * L)^2, L = 1
    constexpr double kC2 = 0.03 * 0.03;
    if (a.height < kWin || a.width < kWin)
        fail(ErrorCode::Data, "ssim: image smaller than the 11x11 window");

    std::array<double, kWin * kWin> win{};
    double wsum = 0.0;
    for (int i = 0; i < kWin; ++i)
        for (int j = 0; j < kWin; ++j) {
            double dy = i - (kWin - 1) / 2.0, dx = j - (kWin - 1) / 2.0;
            win[size_t(i * kWin + j)] = std::exp(-(dy * dy + dx * dx) / (2 * kSigma * kSigma));
            wsum += win[size_t(i * kWin + j)];
        }
    for (double& w : win) w /= wsum;

    const int oh = a.height - kWin + 1;
    const int ow = a.width - kWin + 1;
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        double channel_sum = parallel_sum(oh, [&](int oy) {
            double row = 0.0;
            for (int ox = 0; ox < ow; ++ox) {
                double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
                for (int i = 0; i < kWin; ++i)
                    for (int j = 0; j < kWin; ++j) {
                        double w = win[size_t(i * kWin + j)];
                        double va = a.at(oy + i, ox + j, c);
                        double vb = b.at(oy + i, ox + j, c);
                        mx += w * va;
                        my += w * vb;
                        mxx += w * va * va;
                        myy += w * vb * vb;
                        mxy += w * va * vb;
                    }
                double vx = mxx - mx * mx;
                double vy = myy - my * my;
                double cov = mxy - mx * my;
                row += ((2 * mx * my + kC1) * (2 * cov + kC2)) /
                       ((mx * mx + my * my + kC1) * (vx + vy + kC2));
            }
            return row;
        });
        total += channel_sum / (double(oh) * ow);
    }
    return total / 3.0;
}

double ciede2000_pair(double l1, double a1, double b1, double l2, double a2, double b2) {
    double c1 = std::hypot(a1, b1);
    double c2 = std::hypot(a2, b2);
    double cbar = 0.5 * (c1 + c2);
    double cbar7 = std::pow(cbar, 7.0);
    double g = 0.5 * (1.0 - std::sqrt(cbar7 / (cbar7 + kPow25_7)));
    double a1p = (1.0 + g) * a1;
    double a2p = (1.0 + g) * a2;
    double c1p = std::hypot(a1p, b1);
    double c2p = std::hypot(a2p, b2);

    auto hue_deg = [](double ap, double b) {
        if (ap == 0.0 && b == 0.0) return 0.0;
        double h = std::atan2(b, ap) * 180.0 / kPi;
        return h < 0.0 ? h + 360.0 : h;
    };
    double h1p = hue_deg(a1p, b1);
    double h2p = hue_deg(a2p, b2);

    double dlp = l2 - l1;
    double dcp = c2p - c1p;
    double dhp_deg;
    if (c1p * c2p == 0.0) {
        dhp_deg = 0.0;
    } else {
        double d = h2p - h1p;
        if (d > 180.0)
            dhp_deg = d - 360.0;
        else if (d < -180.0)
            dhp_deg = d + 360.0;
        else
            dhp_deg = d;
    }
    double dhp = 2.0 * std::sqrt(c1p * c2p) * std::sin(deg2rad(dhp_deg) / 2.0);

    double lbar = 0.5 * (l1 + l2);
    double cbarp = 0.5 * (c1p + c2p);
    double hbar;
    if (c1p * c2p == 0.0) {
        hbar = h1p + h2p;
    } else {
        double s = h1p + h2p;
        if (std::fabs(h1p - h2p) <= 180.0)
            hbar = 0.5 * s;
        else if (s < 360.0)
            hbar = 0.5 * (s + 360.0);
        else
            hbar = 0.5 * (s - 360.0);
    }
    double t = 1.0 - 0.17 * std::cos(deg2rad(hbar - 30.0)) + 0.24 * std::cos(deg2rad(2.0 * hbar)) +
               0.32 * std::cos(deg2rad(3.0 * hbar + 6.0)) - 0.20 * std::cos(deg2rad(4.0 * hbar - 63.0));
    double dtheta = 30.0 * std::exp(-((hbar - 275.0) / 25.0) * ((hbar - 275.0) / 25.0));
    double cbarp7 = std::pow(cbarp, 7.0);
    double rc = 2.0 * std::sqrt(cbarp7 / (cbarp7 + kPow25_7));
    double lm50 = (lbar - 50.0) * (lbar - 50.0);
    double sl = 1.0 + 0.015 * lm50 / std::sqrt(20.0 + lm50);
    double sc = 1.0 + 0.045 * cbarp;
    double sh = 1.0 + 0.015 * cbarp * t;
    double rt = -std::sin(deg2rad(2.0 * dtheta)) * rc;

    double xl = dlp / sl;
    double xc = dcp / sc;
    double xh = dhp / sh;
    return std::sqrt(xl * xl + xc * xc + xh * xh + rt * xc * xh);
}

Ciede2000Result ciede2000(const color::LabImage& a, const color::LabImage& b) {
    if (a.height != b.height || a.width != b.width)
        fail(ErrorCode::Data, "ciede2000: dimension mismatch");
    Ciede2000Result res;
    res.per_pixel = ScalarField(a.height, a.width);
    double sum = parallel_sum(a.height, [&](int y) {
        double row = 0.0;
        for (int x = 0; x < a.width; ++x) {
            size_t i = (size_t(y) * a.width + x) * 3;
            double de = ciede2000_pair(a.data[i], a.data[i + 1], a.data[i + 2],
                                       b.data[i], b.data[i + 1], b.data[i + 2]);
            res.per_pixel.at(y, x) = float(de);
            row += de;
        }
        return row;
    });
    res.mean = sum / (double(a.height) * a.width);
    return res;
}

}  // namespace hazelab::metrics
