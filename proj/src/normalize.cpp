#include "fres/normalize.hpp"

#include <algorithm>
#include <cctype>

namespace fres {

namespace {

bool is_terminal_punct(char c) {
    return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?';
}

// "1,234" -> "1234"; returns the input unchanged when the comma placement
// does not look like digit grouping.
std::string strip_thousands_separators(const std::string& s) {
    if (s.find(',') == std::string::npos) return s;
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    std::size_t group_start = i;
    bool first_group = true;
    for (;; ++i) {
        if (i == s.size() || s[i] == ',' || s[i] == '.') {
            std::size_t len = i - group_start;
            if (first_group) {
                if (len == 0 || len > 3) return s;
                first_group = false;
            } else if (len != 3) {
                return s;
            }
            if (i == s.size()) break;
            if (s[i] == '.') {
                if (i + 1 == s.size()) return s;
                for (std::size_t j = i + 1; j < s.size(); ++j)
                    if (!std::isdigit(static_cast<unsigned char>(s[j]))) return s;
                break;
            }
            group_start = i + 1;
        } else if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            return s;
        }
    }
    std::string out;
    out.reserve(s.size());
    for (char c : s)
        if (c != ',') out.push_back(c);
    return out;
}

// Canonical decimal: no sign for zero, no leading zeros, no trailing
// fractional zeros, no bare trailing dot. Returns false when s is not a
// plain decimal number.
bool canonicalize_number(const std::string& s, std::string& out) {
    std::size_t i = 0;
    bool negative = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        negative = (s[i] == '-');
        ++i;
    }
    std::string int_part, frac_part;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
        int_part.push_back(s[i++]);
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
            frac_part.push_back(s[i++]);
    }
    if (i != s.size()) return false;
    if (int_part.empty() && frac_part.empty()) return false;

    std::size_t nz = int_part.find_first_not_of('0');
    int_part = (nz == std::string::npos) ? "" : int_part.substr(nz);
    while (!frac_part.empty() && frac_part.back() == '0') frac_part.pop_back();

    if (int_part.empty() && frac_part.empty()) {
        out = "0";
        return true;
    }
    out.clear();
    if (negative) out.push_back('-');
    out += int_part.empty() ? "0" : int_part;
    if (!frac_part.empty()) {
        out.push_back('.');
        out += frac_part;
    }
    return true;
}

}  // namespace

std::string normalize_answer(std::string_view text) {
    std::string s(text);

    const auto trim = [](std::string& v) {
        std::size_t b = v.find_first_not_of(" \t\r\n");
        std::size_t e = v.find_last_not_of(" \t\r\n");
        v = (b == std::string::npos) ? std::string{} : v.substr(b, e - b + 1);
    };

    // Peel enclosing quotes and terminal punctuation to a fixpoint:
    // `"Paris".` unwraps fully.
    trim(s);
    for (bool changed = true; changed && !s.empty();) {
        changed = false;
        if (s.size() >= 2 && ((s.front() == '"' && s.back() == '"') ||
                              (s.front() == '\'' && s.back() == '\''))) {
            s = s.substr(1, s.size() - 2);
            changed = true;
        }
        while (!s.empty() && is_terminal_punct(s.back())) {
            s.pop_back();
            changed = true;
        }
        if (changed) trim(s);
    }

    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

    std::string collapsed;
    collapsed.reserve(s.size());
    bool in_space = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            in_space = true;
        } else {
            if (in_space && !collapsed.empty()) collapsed.push_back(' ');
            in_space = false;
            collapsed.push_back(static_cast<char>(c));
        }
    }
    s = std::move(collapsed);

    std::string canonical;
    if (canonicalize_number(strip_thousands_separators(s), canonical)) return canonical;
    return s;
}

bool exact_match(std::string_view prediction, const std::vector<std::string>& gold_answers) {
    const std::string norm_pred = normalize_answer(prediction);
    return std::any_of(gold_answers.begin(), gold_answers.end(),
                       [&](const std::string& gold) {
                           return normalize_answer(gold) == norm_pred;
                       });
}

bool contains_normalized(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return false;
    if (haystack == needle) return true;
    std::string padded_hay = " " + std::string(haystack) + " ";
    std::string padded_needle = " " + std::string(needle) + " ";
    return padded_hay.find(padded_needle) != std::string::npos;
}

}  // namespace fres
