#include "tvwb/rational.hpp"

#include <cctype>
#include <cstdlib>

namespace tvwb {

namespace {

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

} // namespace

std::optional<Rational> parse_rational(const std::string& text) {
    std::string s = text;
    // trim
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    if (s.empty()) return std::nullopt;

    bool neg = false;
    if (s.front() == '-' || s.front() == '+') {
        neg = s.front() == '-';
        s.erase(s.begin());
    }

    auto slash = s.find('/');
    if (slash != std::string::npos) {
        std::string a = s.substr(0, slash), b = s.substr(slash + 1);
        if (!all_digits(a) || !all_digits(b)) return std::nullopt;
        errno = 0;
        std::int64_t n = std::strtoll(a.c_str(), nullptr, 10);
        std::int64_t d = std::strtoll(b.c_str(), nullptr, 10);
        if (errno != 0 || d == 0) return std::nullopt;
        return Rational(neg ? -n : n, d);
    }

    auto dot = s.find('.');
    if (dot != std::string::npos) {
        std::string a = s.substr(0, dot), b = s.substr(dot + 1);
        if (a.empty()) a = "0";
        if (!all_digits(a) || (!b.empty() && !all_digits(b))) return std::nullopt;
        if (b.size() > 18) return std::nullopt; // denominator would overflow
        std::int64_t ip = std::strtoll(a.c_str(), nullptr, 10);
        std::int64_t fp = b.empty() ? 0 : std::strtoll(b.c_str(), nullptr, 10);
        std::int64_t den = 1;
        for (std::size_t i = 0; i < b.size(); ++i) den *= 10;
        __int128 num = static_cast<__int128>(ip) * den + fp;
        if (num > INT64_MAX) return std::nullopt;
        std::int64_t n = static_cast<std::int64_t>(num);
        return Rational(neg ? -n : n, den);
    }

    if (!all_digits(s)) return std::nullopt;
    errno = 0;
    std::int64_t n = std::strtoll(s.c_str(), nullptr, 10);
    if (errno != 0) return std::nullopt;
    return Rational(neg ? -n : n, 1);
}

} // namespace tvwb
