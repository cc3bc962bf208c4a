#include "io/imageio.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace tamp {

namespace {

cv::Mat load_or_throw(const std::string& path, int flags) {
    cv::Mat m = cv::imread(path, flags);
    if (m.empty()) throw std::runtime_error("failed to read image: " + path);
    return m;
}

unsigned char quantize(float v, float lo, float hi) {
    const float t = (v - lo) / (hi - lo);
    const float scaled = std::min(1.0f, std::max(0.0f, t)) * 255.0f;
    return static_cast<unsigned char>(std::lround(scaled));
}

cv::Mat tensor_to_bgr8(const Tensor& img, float lo, float hi) {
    check_rank3(img, "tensor_to_bgr8");
    if (img.channels() != 3) throw std::invalid_argument("expected 3-channel image");
    cv::Mat m(img.height(), img.width(), CV_8UC3);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            auto& px = m.at<cv::Vec3b>(y, x);
            px[2] = quantize(img.at(0, y, x), lo, hi);
            px[1] = quantize(img.at(1, y, x), lo, hi);
            px[0] = quantize(img.at(2, y, x), lo, hi);
        }
    return m;
}

}  // namespace

Tensor read_image_rgb(const std::string& path) {
    const cv::Mat m = load_or_throw(path, cv::IMREAD_COLOR);
    Tensor out({3, m.rows, m.cols});
    for (int y = 0; y < m.rows; ++y)
        for (int x = 0; x < m.cols; ++x) {
            const auto& px = m.at<cv::Vec3b>(y, x);
            out.at(0, y, x) = px[2] / 255.0f;
            out.at(1, y, x) = px[1] / 255.0f;
            out.at(2, y, x) = px[0] / 255.0f;
        }
    return out;
}

Tensor read_image_gray(const std::string& path) {
    const cv::Mat m = load_or_throw(path, cv::IMREAD_GRAYSCALE);
    Tensor out({1, m.rows, m.cols});
    for (int y = 0; y < m.rows; ++y)
        for (int x = 0; x < m.cols; ++x) out.at(0, y, x) = m.at<unsigned char>(y, x) / 255.0f;
    return out;
}

void write_ppm(const std::string& path, const Tensor& img, float lo, float hi) {
    check_rank3(img, "write_ppm");
    if (img.channels() != 3) throw std::invalid_argument("write_ppm: expected 3 channels");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("failed to open for write: " + path);
    f << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
    std::vector<unsigned char> row(static_cast<size_t>(img.width()) * 3);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < 3; ++c) row[x * 3 + c] = quantize(img.at(c, y, x), lo, hi);
        f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!f) throw std::runtime_error("failed to write: " + path);
}

void write_pgm(const std::string& path, const Tensor& map, float lo, float hi) {
    check_rank3(map, "write_pgm");
    if (map.channels() != 1) throw std::invalid_argument("write_pgm: expected 1 channel");
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("failed to open for write: " + path);
    f << "P5\n" << map.width() << ' ' << map.height() << "\n255\n";
    std::vector<unsigned char> row(static_cast<size_t>(map.width()));
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) row[x] = quantize(map.at(0, y, x), lo, hi);
        f.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
    }
    if (!f) throw std::runtime_error("failed to write: " + path);
}

void write_preview_jpg(const std::string& path, const Tensor& img, float lo, float hi) {
    const cv::Mat m = tensor_to_bgr8(img, lo, hi);
    if (!cv::imwrite(path, m, {cv::IMWRITE_JPEG_QUALITY, 92}))
        throw std::runtime_error("failed to write preview: " + path);
}

namespace {
Tensor resize_with(const Tensor& img, int out_h, int out_w, int interp) {
    check_rank3(img, "resize");
    if (out_h <= 0 || out_w <= 0) throw std::invalid_argument("resize: bad target size");
    Tensor out({img.channels(), out_h, out_w});
    for (int c = 0; c < img.channels(); ++c) {
        cv::Mat src(img.height(), img.width(), CV_32FC1,
                    const_cast<float*>(img.data.data()) +
                        static_cast<size_t>(c) * img.height() * img.width());
        cv::Mat dst(out_h, out_w, CV_32FC1,
                    out.data.data() + static_cast<size_t>(c) * out_h * out_w);
        cv::resize(src, dst, cv::Size(out_w, out_h), 0, 0, interp);
    }
    return out;
}
}  // namespace

Tensor resize_bilinear(const Tensor& img, int out_h, int out_w) {
    return resize_with(img, out_h, out_w, cv::INTER_LINEAR);
}

Tensor resize_nearest(const Tensor& img, int out_h, int out_w) {
    return resize_with(img, out_h, out_w, cv::INTER_NEAREST);
}

Tensor compose_grid(const std::vector<std::vector<Tensor>>& rows) {
    if (rows.empty() || rows.front().empty()) throw std::invalid_argument("compose_grid: empty");
    const int th = rows[0][0].height(), tw = rows[0][0].width();
    const int cols = static_cast<int>(rows[0].size());
    constexpr int gap = 2;
    const int H = static_cast<int>(rows.size()) * (th + gap) - gap;
    const int W = cols * (tw + gap) - gap;
    Tensor out({3, H, W}, 1.0f);  // white separators
    for (size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<int>(rows[r].size()) != cols)
            throw std::invalid_argument("compose_grid: ragged rows");
        for (int cidx = 0; cidx < cols; ++cidx) {
            const Tensor& tile = rows[r][cidx];
            if (tile.channels() != 3 || tile.height() != th || tile.width() != tw)
                throw std::invalid_argument("compose_grid: tile size mismatch");
            const int oy = static_cast<int>(r) * (th + gap);
            const int ox = cidx * (tw + gap);
            for (int c = 0; c < 3; ++c)
                for (int y = 0; y < th; ++y)
                    for (int x = 0; x < tw; ++x) out.at(c, oy + y, ox + x) = tile.at(c, y, x);
        }
    }
    return out;
}

Tensor map_to_rgb(const Tensor& map) {
    check_rank3(map, "map_to_rgb");
    if (map.channels() != 1) throw std::invalid_argument("map_to_rgb: expected 1 channel");
    Tensor out({3, map.height(), map.width()});
    const int hw = map.height() * map.width();
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < hw; ++i) out.data[c * hw + i] = map.data[i] * 2.0f - 1.0f;
    return out;
}

}  // namespace tamp
