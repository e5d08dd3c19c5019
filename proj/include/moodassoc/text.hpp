#pragma once

// Unicode text canonicalization shared by the lexicon, playlist matching, and
// lyric tokenization. Everything that compares text goes through the same
// normal form: NFKC, root-locale lowercase, whitespace trim.

#include <string>
#include <string_view>
#include <vector>

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf16.h>

#include "moodassoc/errors.hpp"

namespace moodassoc {

namespace detail {

inline icu::UnicodeString normalized_ustring(std::string_view utf8) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfkc = icu::Normalizer2::getNFKCInstance(status);
    if (U_FAILURE(status)) throw InternalError("ICU NFKC normalizer unavailable");
    icu::UnicodeString in = icu::UnicodeString::fromUTF8(
        icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    icu::UnicodeString out = nfkc->normalize(in, status);
    if (U_FAILURE(status)) throw DataError("unicode normalization failed");
    out.toLower(icu::Locale::getRoot());
    return out;
}

inline std::string to_utf8(const icu::UnicodeString& u) {
    std::string out;
    u.toUTF8String(out);
    return out;
}

}  // namespace detail

// NFKC + lowercase + trim. Canonical form for lexicon terms and any text
// compared against them.
inline std::string normalize_term(std::string_view utf8) {
    icu::UnicodeString u = detail::normalized_ustring(utf8);
    const char16_t* buf = u.getBuffer();
    int32_t b = 0, e = u.length();
    while (b < e) {
        UChar32 c = u.char32At(b);
        if (!u_isUWhiteSpace(c)) break;
        b += U16_LENGTH(c);
    }
    while (e > b) {
        int32_t j = e;
        U16_BACK_1(buf, 0, j);
        UChar32 c = u.char32At(j);
        if (!u_isUWhiteSpace(c)) break;
        e = j;
    }
    return detail::to_utf8(u.tempSubStringBetween(b, e));
}

// Splits normalized text into tokens: runs of alphanumeric code points.
// Whitespace, punctuation, and symbols all separate.
inline std::vector<std::string> tokenize(std::string_view utf8) {
    icu::UnicodeString u = detail::normalized_ustring(utf8);
    std::vector<std::string> tokens;
    icu::UnicodeString cur;
    for (int32_t i = 0; i < u.length();) {
        UChar32 c = u.char32At(i);
        if (u_isalnum(c)) {
            cur.append(c);
        } else if (!cur.isEmpty()) {
            tokens.push_back(detail::to_utf8(cur));
            cur.remove();
        }
        i += U16_LENGTH(c);
    }
    if (!cur.isEmpty()) tokens.push_back(detail::to_utf8(cur));
    return tokens;
}

}  // namespace moodassoc
