#pragma once

#include <chrono>
#include <charconv>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace holdswitch {

/// Calendar day. Parsed from and printed as ISO-8601 `YYYY-MM-DD`.
class Date {
public:
    Date() = default;
    explicit Date(std::chrono::year_month_day ymd) : ymd_(ymd) {}
    Date(int y, unsigned m, unsigned d)
        : ymd_(std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}) {}

    static std::optional<Date> parse(std::string_view s) {
        if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
        int y = 0;
        unsigned m = 0, d = 0;
        auto field = [&](std::size_t pos, std::size_t len, auto& out) {
            auto first = s.data() + pos;
            auto [ptr, ec] = std::from_chars(first, first + len, out);
            return ec == std::errc{} && ptr == first + len;
        };
        if (!field(0, 4, y) || !field(5, 2, m) || !field(8, 2, d)) return std::nullopt;
        Date out(y, m, d);
        if (!out.ymd_.ok()) return std::nullopt;
        return out;
    }

    std::string str() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd_.year()),
                      static_cast<unsigned>(ymd_.month()), static_cast<unsigned>(ymd_.day()));
        return buf;
    }

    std::chrono::year_month_day ymd() const { return ymd_; }

    Date next_day() const {
        return Date(std::chrono::year_month_day{std::chrono::sys_days{ymd_} + std::chrono::days{1}});
    }

    auto operator<=>(const Date&) const = default;

private:
    std::chrono::year_month_day ymd_{std::chrono::year{1970}, std::chrono::month{1},
                                     std::chrono::day{1}};
};

}  // namespace holdswitch
