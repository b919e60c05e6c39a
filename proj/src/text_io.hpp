#pragma once

#include <charconv>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fleetplan::detail {

/// Shortest decimal text that reads back to the same double.
inline std::string exact(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <class T, class Error>
T read_token(std::istream& in, const char* what) {
    std::string tok;
    if (!(in >> tok)) throw Error(std::string("unexpected end of input reading ") + what);
    T v{};
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
        throw Error(std::string("bad ") + what + ": '" + tok + "'");
    return v;
}

template <class Error>
void expect_word(std::istream& in, std::string_view word) {
    std::string tok;
    if (!(in >> tok) || tok != word) throw Error("expected '" + std::string(word) + "', got '" + tok + "'");
}

}  // namespace fleetplan::detail
