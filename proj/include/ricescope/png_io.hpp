#pragma once

// PNG read/write through OpenCV's codecs.

#include <cstring>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "imaging.hpp"

namespace ricescope {

inline cv::Mat to_mat(const RgbImage& img) {
    cv::Mat rgb(img.height(), img.width(), CV_8UC3, const_cast<std::uint8_t*>(img.data().data()));
    return rgb.clone();
}

inline RgbImage from_mat_rgb(const cv::Mat& rgb) {
    RgbImage out(rgb.cols, rgb.rows);
    for (int y = 0; y < rgb.rows; ++y)
        std::memcpy(out.data().data() + static_cast<std::size_t>(y) * rgb.cols * 3, rgb.ptr(y),
                    static_cast<std::size_t>(rgb.cols) * 3);
    return out;
}

inline RgbImage read_png(const std::string& path) {
    const cv::Mat bgr = cv::imread(path, cv::IMREAD_COLOR);
    if (bgr.empty()) fail(ErrorCode::IO_ERROR, "cannot read image " + path);
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    return from_mat_rgb(rgb);
}

inline void write_png(const RgbImage& img, const std::string& path) {
    cv::Mat bgr;
    cv::cvtColor(to_mat(img), bgr, cv::COLOR_RGB2BGR);
    bool ok = false;
    try {
        ok = cv::imwrite(path, bgr);
    } catch (const cv::Exception& e) {
        fail(ErrorCode::IO_ERROR, "cannot write " + path + ": " + e.what());
    }
    if (!ok) fail(ErrorCode::IO_ERROR, "cannot write " + path);
}

} // namespace ricescope
