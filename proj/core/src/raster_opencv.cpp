#include "geosynth/raster_opencv.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <cmath>

namespace geosynth {

namespace {

    cv::Scalar color(const std::string& hex)
    {
        if (hex.size() != 7 || hex[0] != '#') {
            return { 0, 0, 0 };
        }
        const unsigned long v = std::stoul(hex.substr(1), nullptr, 16);
        return { double(v & 0xFF), double((v >> 8) & 0xFF), double((v >> 16) & 0xFF) };
    }

    cv::Point pt(Vec2 v) { return { static_cast<int>(std::lround(v.x)), static_cast<int>(std::lround(v.y)) }; }

    void draw_text(cv::Mat& img, const Primitive& p, int font_px, const cv::Scalar& c)
    {
        static const std::string kDegree = "\xC2\xB0";
        std::string body = p.text;
        bool degree = false;
        if (auto pos = body.find(kDegree); pos != std::string::npos) {
            body.erase(pos, kDegree.size());
            degree = true;
        }
        const double scale = font_px / 30.0;
        int baseline = 0;
        const cv::Size sz = cv::getTextSize(body, cv::FONT_HERSHEY_SIMPLEX, scale, 1, &baseline);
        const double ring = degree ? font_px * 0.15 : 0.0;
        const double left = p.pts[0].x - (sz.width + 2.5 * ring) / 2;
        const cv::Point origin(static_cast<int>(std::lround(left)), static_cast<int>(std::lround(p.pts[0].y + sz.height / 2.0)));
        cv::putText(img, body, origin, cv::FONT_HERSHEY_SIMPLEX, scale, c, 1, cv::LINE_AA);
        if (degree) {
            const cv::Point centre(static_cast<int>(std::lround(left + sz.width + 1.5 * ring)),
                static_cast<int>(std::lround(p.pts[0].y - sz.height / 2.0 + ring)));
            cv::circle(img, centre, std::max(1, static_cast<int>(std::lround(ring))), c, 1, cv::LINE_AA);
        }
    }

} // namespace

std::vector<std::uint8_t> OpenCvRasterizer::png(const Drawing& d) const
{
    cv::Mat img(d.height, d.width, CV_8UC3, color(d.palette.background));
    for (const auto& g : d.groups) {
        for (const auto& p : g.items) {
            const cv::Scalar c = color(p.annotation ? d.palette.annotation : d.palette.figure);
            const int w = p.annotation ? std::max(1, d.stroke_width - 1) : d.stroke_width;
            switch (p.kind) {
            case PrimitiveKind::Line:
                cv::line(img, pt(p.pts[0]), pt(p.pts[1]), c, w, cv::LINE_AA);
                break;
            case PrimitiveKind::Circle:
                cv::circle(img, pt(p.pts[0]), static_cast<int>(std::lround(p.radius)), c, w, cv::LINE_AA);
                break;
            case PrimitiveKind::Dot:
                cv::circle(img, pt(p.pts[0]), static_cast<int>(std::ceil(p.radius)), c, cv::FILLED, cv::LINE_AA);
                break;
            case PrimitiveKind::Arc: {
                // OpenCV angles run clockwise on screen; ours run counterclockwise.
                const int r = static_cast<int>(std::lround(p.radius));
                cv::ellipse(img, pt(p.pts[0]), { r, r }, 0, -p.start_deg - p.sweep_deg, -p.start_deg, c, w, cv::LINE_AA);
                break;
            }
            case PrimitiveKind::Polyline: {
                std::vector<cv::Point> pts;
                for (auto v : p.pts) {
                    pts.push_back(pt(v));
                }
                cv::polylines(img, pts, false, c, w, cv::LINE_AA);
                break;
            }
            case PrimitiveKind::Text:
                draw_text(img, p, d.font_size, c);
                break;
            }
        }
    }
    std::vector<std::uint8_t> out;
    cv::imencode(".png", img, out);
    return out;
}

} // namespace geosynth
