#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "aquaperc/imstats.hpp"
#include "aquaperc/rng.hpp"

// Feature pipeline used by match_consecutive: difference-of-Gaussians
// detector with a contrast threshold, orientation-normalized 8x8 patch
// descriptors, ratio-test matching and a RANSAC homography.

namespace aquaperc::imstats {

namespace {

struct GrayImage {
    int w{0}, h{0};
    std::vector<float> v;

    float at(int x, int y) const {
        x = std::clamp(x, 0, w - 1);
        y = std::clamp(y, 0, h - 1);
        return v[static_cast<size_t>(y) * w + x];
    }

    float sample(double x, double y) const {
        int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
        double fx = x - x0, fy = y - y0;
        return static_cast<float>((1 - fy) * ((1 - fx) * at(x0, y0) + fx * at(x0 + 1, y0)) +
                                  fy * ((1 - fx) * at(x0, y0 + 1) + fx * at(x0 + 1, y0 + 1)));
    }
};

GrayImage luminance_of(const ImageF& img) {
    GrayImage g;
    g.w = img.width;
    g.h = img.height;
    g.v.resize(static_cast<size_t>(g.w) * g.h);
    for (int y = 0; y < g.h; ++y)
        for (int x = 0; x < g.w; ++x)
            g.v[static_cast<size_t>(y) * g.w + x] = static_cast<float>(img.luminance(x, y));
    return g;
}

GrayImage gaussian_blur(const GrayImage& in, double sigma) {
    int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double norm = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        norm += kernel[i + radius];
    }
    for (auto& k : kernel) k /= norm;

    GrayImage tmp{in.w, in.h, std::vector<float>(in.v.size())};
    for (int y = 0; y < in.h; ++y)
        for (int x = 0; x < in.w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * in.at(x + i, y);
            tmp.v[static_cast<size_t>(y) * in.w + x] = static_cast<float>(acc);
        }
    GrayImage out{in.w, in.h, std::vector<float>(in.v.size())};
    for (int y = 0; y < in.h; ++y)
        for (int x = 0; x < in.w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp.at(x, y + i);
            out.v[static_cast<size_t>(y) * in.w + x] = static_cast<float>(acc);
        }
    return out;
}

struct Keypoint {
    double x, y;
    double response;
    double angle;
};

struct Feature {
    Keypoint kp;
    std::array<float, 64> desc;
};

std::vector<Feature> detect_and_describe(const ImageF& img, const MatchParams& params) {
    ImageF enhanced = clahe(img, params.clahe_clip, params.clahe_tiles);
    GrayImage gray = luminance_of(enhanced);
    GrayImage b0 = gaussian_blur(gray, 1.0);
    GrayImage b1 = gaussian_blur(gray, 1.6);
    GrayImage dog{gray.w, gray.h, std::vector<float>(gray.v.size())};
    for (size_t i = 0; i < dog.v.size(); ++i) dog.v[i] = b1.v[i] - b0.v[i];

    const int margin = 10;
    std::vector<Keypoint> kps;
    for (int y = margin; y < gray.h - margin; ++y) {
        for (int x = margin; x < gray.w - margin; ++x) {
            float v = dog.at(x, y);
            if (std::abs(v) < params.contrast_threshold) continue;
            bool extremum = true;
            for (int dy = -1; dy <= 1 && extremum; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    float nb = dog.at(x + dx, y + dy);
                    if ((v > 0 && nb >= v) || (v < 0 && nb <= v)) {
                        extremum = false;
                        break;
                    }
                }
            if (extremum) kps.push_back({static_cast<double>(x), static_cast<double>(y),
                                         std::abs(v), 0.0});
        }
    }
    std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
        if (a.response != b.response) return a.response > b.response;
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    });
    if (static_cast<int>(kps.size()) > params.max_features) kps.resize(params.max_features);

    // Dominant orientation from a 36-bin gradient histogram.
    std::vector<Feature> feats;
    feats.reserve(kps.size());
    for (auto& kp : kps) {
        double hist[36] = {0};
        for (int dy = -4; dy <= 4; ++dy)
            for (int dx = -4; dx <= 4; ++dx) {
                int px = static_cast<int>(kp.x) + dx, py = static_cast<int>(kp.y) + dy;
                double gx = b0.at(px + 1, py) - b0.at(px - 1, py);
                double gy = b0.at(px, py + 1) - b0.at(px, py - 1);
                double mag = std::sqrt(gx * gx + gy * gy);
                double ang = std::atan2(gy, gx);
                int bin = static_cast<int>(std::floor((ang + 3.14159265358979) / (2 * 3.14159265358979) * 36));
                bin = std::clamp(bin, 0, 35);
                hist[bin] += mag * std::exp(-0.05 * (dx * dx + dy * dy));
            }
        int best = 0;
        for (int i = 1; i < 36; ++i)
            if (hist[i] > hist[best]) best = i;
        kp.angle = (best + 0.5) / 36.0 * 2 * 3.14159265358979 - 3.14159265358979;

        // 8x8 samples, spacing 2 px, rotated; mean-free, L2-normalized.
        Feature f;
        f.kp = kp;
        double ca = std::cos(kp.angle), sa = std::sin(kp.angle);
        double mean = 0.0;
        for (int j = 0; j < 8; ++j)
            for (int i = 0; i < 8; ++i) {
                double lx = (i - 3.5) * 2.0, ly = (j - 3.5) * 2.0;
                double sx = kp.x + ca * lx - sa * ly;
                double sy = kp.y + sa * lx + ca * ly;
                f.desc[j * 8 + i] = b0.sample(sx, sy);
                mean += f.desc[j * 8 + i];
            }
        mean /= 64.0;
        double norm = 0.0;
        for (auto& d : f.desc) {
            d -= static_cast<float>(mean);
            norm += static_cast<double>(d) * d;
        }
        norm = std::sqrt(std::max(norm, 1e-12));
        for (auto& d : f.desc) d = static_cast<float>(d / norm);
        feats.push_back(f);
    }
    return feats;
}

double desc_dist2(const Feature& a, const Feature& b) {
    double acc = 0.0;
    for (int i = 0; i < 64; ++i) {
        double d = static_cast<double>(a.desc[i]) - b.desc[i];
        acc += d * d;
    }
    return acc;
}

struct Match {
    int ia, ib;
};

std::vector<Match> ratio_match(const std::vector<Feature>& fa, const std::vector<Feature>& fb,
                               double ratio) {
    std::vector<Match> matches;
    for (size_t i = 0; i < fa.size(); ++i) {
        double best = 1e300, second = 1e300;
        int best_j = -1;
        for (size_t j = 0; j < fb.size(); ++j) {
            double d = desc_dist2(fa[i], fb[j]);
            if (d < best) {
                second = best;
                best = d;
                best_j = static_cast<int>(j);
            } else if (d < second) {
                second = d;
            }
        }
        if (best_j >= 0 && best < ratio * ratio * second)
            matches.push_back({static_cast<int>(i), best_j});
    }
    return matches;
}

bool dlt_homography(const std::vector<std::array<double, 4>>& pts, Eigen::Matrix3d* H) {
    // Hartley normalization.
    double cax = 0, cay = 0, cbx = 0, cby = 0;
    for (const auto& p : pts) {
        cax += p[0];
        cay += p[1];
        cbx += p[2];
        cby += p[3];
    }
    double n = static_cast<double>(pts.size());
    cax /= n;
    cay /= n;
    cbx /= n;
    cby /= n;
    double sa = 0, sb = 0;
    for (const auto& p : pts) {
        sa += std::hypot(p[0] - cax, p[1] - cay);
        sb += std::hypot(p[2] - cbx, p[3] - cby);
    }
    sa = sa > 1e-9 ? std::sqrt(2.0) * n / sa : 1.0;
    sb = sb > 1e-9 ? std::sqrt(2.0) * n / sb : 1.0;

    Eigen::MatrixXd A(2 * pts.size(), 9);
    for (size_t i = 0; i < pts.size(); ++i) {
        double x = (pts[i][0] - cax) * sa, y = (pts[i][1] - cay) * sa;
        double u = (pts[i][2] - cbx) * sb, v = (pts[i][3] - cby) * sb;
        A.row(2 * i) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
        A.row(2 * i + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    Eigen::VectorXd hvec = svd.matrixV().col(8);
    Eigen::Matrix3d Hn;
    Hn << hvec(0), hvec(1), hvec(2), hvec(3), hvec(4), hvec(5), hvec(6), hvec(7), hvec(8);

    Eigen::Matrix3d Ta, Tb;
    Ta << sa, 0, -sa * cax, 0, sa, -sa * cay, 0, 0, 1;
    Tb << sb, 0, -sb * cbx, 0, sb, -sb * cby, 0, 0, 1;
    Eigen::Matrix3d Hout = Tb.inverse() * Hn * Ta;
    if (std::abs(Hout(2, 2)) < 1e-12) return false;
    *H = Hout / Hout(2, 2);
    return H->allFinite();
}

int count_inliers(const Eigen::Matrix3d& H, const std::vector<Feature>& fa,
                  const std::vector<Feature>& fb, const std::vector<Match>& matches,
                  double threshold, std::vector<char>* mask) {
    int inliers = 0;
    for (size_t k = 0; k < matches.size(); ++k) {
        const auto& a = fa[matches[k].ia].kp;
        const auto& b = fb[matches[k].ib].kp;
        Eigen::Vector3d p = H * Eigen::Vector3d(a.x, a.y, 1.0);
        bool ok = false;
        if (std::abs(p(2)) > 1e-12) {
            double ex = p(0) / p(2) - b.x;
            double ey = p(1) / p(2) - b.y;
            ok = ex * ex + ey * ey < threshold * threshold;
        }
        (*mask)[k] = ok ? 1 : 0;
        inliers += ok ? 1 : 0;
    }
    return inliers;
}

}  // namespace

MatchReport match_consecutive(const ImageF& a, const ImageF& b, const MatchParams& params) {
    if (!a.same_size(b))
        throw std::invalid_argument("match_consecutive: images must have identical dimensions");

    std::vector<Feature> fa = detect_and_describe(a, params);
    std::vector<Feature> fb = detect_and_describe(b, params);

    MatchReport report;
    report.n_features = static_cast<int>((fa.size() + fb.size() + 1) / 2);

    std::vector<Match> matches = ratio_match(fa, fb, params.ratio);
    report.n_matches = static_cast<int>(matches.size());
    if (matches.size() < 4) {
        report.n_inliers = 0;
        report.inlier_ratio = 0.0;
        return report;
    }

    Pcg32 rng(params.seed, 0x52414e53ULL);
    std::vector<char> mask(matches.size(), 0), best_mask(matches.size(), 0);
    Eigen::Matrix3d best_h = Eigen::Matrix3d::Identity();
    int best_inliers = 0;
    for (int iter = 0; iter < params.ransac_iters; ++iter) {
        int idx[4];
        for (int k = 0; k < 4; ++k) {
            bool fresh;
            do {
                idx[k] = static_cast<int>(rng.uniform() * matches.size());
                idx[k] = std::min<int>(idx[k], static_cast<int>(matches.size()) - 1);
                fresh = true;
                for (int j = 0; j < k; ++j) fresh = fresh && idx[j] != idx[k];
            } while (!fresh);
        }
        std::vector<std::array<double, 4>> pts;
        for (int k = 0; k < 4; ++k) {
            const auto& pa = fa[matches[idx[k]].ia].kp;
            const auto& pb = fb[matches[idx[k]].ib].kp;
            pts.push_back({pa.x, pa.y, pb.x, pb.y});
        }
        Eigen::Matrix3d H;
        if (!dlt_homography(pts, &H)) continue;
        int inliers = count_inliers(H, fa, fb, matches, params.inlier_px, &mask);
        if (inliers > best_inliers) {
            best_inliers = inliers;
            best_h = H;
            best_mask = mask;
        }
    }

    // Refit on the inlier set once.
    if (best_inliers >= 4) {
        std::vector<std::array<double, 4>> pts;
        for (size_t k = 0; k < matches.size(); ++k)
            if (best_mask[k]) {
                const auto& pa = fa[matches[k].ia].kp;
                const auto& pb = fb[matches[k].ib].kp;
                pts.push_back({pa.x, pa.y, pb.x, pb.y});
            }
        Eigen::Matrix3d H;
        if (dlt_homography(pts, &H)) {
            int inliers = count_inliers(H, fa, fb, matches, params.inlier_px, &mask);
            if (inliers >= best_inliers) {
                best_inliers = inliers;
                best_h = H;
            }
        }
        report.homography_ok = true;
    }

    report.n_inliers = best_inliers;
    report.inlier_ratio = static_cast<double>(best_inliers) / std::max(report.n_matches, 1);
    report.tx = best_h(0, 2);
    report.ty = best_h(1, 2);
    return report;
}

}  // namespace aquaperc::imstats
