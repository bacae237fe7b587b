#pragma once

// Importance visualisation: words sized and coloured by score.
// Bands: high >= 0.6 (green), mid [0.3, 0.6) (blue), low otherwise (gray).

#include "wimp/corpus.hpp"

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace wimp {

enum class Band : std::uint8_t { low, mid, high };

inline Band importance_band(double score) {
    if (score >= 0.6) return Band::high;
    if (score >= 0.3) return Band::mid;
    return Band::low;
}

inline std::string_view band_name(Band b) {
    switch (b) {
    case Band::high: return "high";
    case Band::mid: return "mid";
    case Band::low: return "low";
    }
    return "low";
}

namespace detail {

inline std::string html_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace detail

// Self-contained HTML page; font size grows linearly from 12px at 0 to 36px at 1.
inline void render_html(std::ostream& out, const std::vector<AnnotatedUtterance>& data) {
    out << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>word importance</title>\n"
        << "<style>.u{margin:1em 0;display:flex;align-items:flex-end;flex-wrap:wrap;gap:0.3em}"
        << ".id{color:#888;font:12px monospace;margin-right:1em}"
        << ".high{color:#2a9d3a}.mid{color:#2b6cc4}.low{color:#999}</style></head><body>\n";
    for (const auto& a : data) {
        out << "<div class=\"u\"><span class=\"id\">" << detail::html_escape(a.utterance.utterance_id) << "</span>";
        for (std::size_t i = 0; i < a.utterance.tokens.size(); ++i) {
            const double s = a.scores[i].value();
            char size[16];
            std::snprintf(size, sizeof size, "%.1f", 12.0 + 24.0 * s);
            out << "<span class=\"" << band_name(importance_band(s)) << "\" style=\"font-size:" << size
                << "px\" title=\"" << detail::format_number(s) << "\">"
                << detail::html_escape(a.utterance.tokens[i].text) << "</span>";
        }
        out << "</div>\n";
    }
    out << "</body></html>\n";
}

// ANSI terminal rendering: high words bold green, mid blue, low dim gray.
inline void render_terminal(std::ostream& out, const std::vector<AnnotatedUtterance>& data, bool color = true) {
    for (const auto& a : data) {
        out << a.utterance.utterance_id << ':';
        for (std::size_t i = 0; i < a.utterance.tokens.size(); ++i) {
            const auto band = importance_band(a.scores[i].value());
            out << ' ';
            if (color) {
                out << (band == Band::high ? "\x1b[1;32m" : band == Band::mid ? "\x1b[34m" : "\x1b[2;37m");
            }
            out << a.utterance.tokens[i].text;
            if (color) {
                out << "\x1b[0m";
            } else {
                out << '[' << band_name(band) << ']';
            }
        }
        out << '\n';
    }
}

} // namespace wimp
