#pragma once

#include <string_view>
#include <unordered_set>

#include "promptpress/annotator.hpp"

namespace promptpress {

/// Built-in English stopword list (the classic 127-word inventory). Lookup
/// keys are lowercase with surrounding punctuation stripped.
inline const std::unordered_set<std::string_view>& stopwords() {
    static const std::unordered_set<std::string_view> kSet = {
        "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours",
        "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself",
        "it", "its", "itself", "they", "them", "their", "theirs", "themselves", "what", "which",
        "who", "whom", "this", "that", "these", "those", "am", "is", "are", "was", "were", "be",
        "been", "being", "have", "has", "had", "having", "do", "does", "did", "doing", "a", "an",
        "the", "and", "but", "if", "or", "because", "as", "until", "while", "of", "at", "by",
        "for", "with", "about", "against", "between", "into", "through", "during", "before",
        "after", "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over",
        "under", "again", "further", "then", "once", "here", "there", "when", "where", "why",
        "how", "all", "any", "both", "each", "few", "more", "most", "other", "some", "such", "no",
        "nor", "not", "only", "own", "same", "so", "than", "too", "very", "s", "t", "can", "will",
        "just", "don", "should", "now",
    };
    return kSet;
}

/// True if the word's lowercase punctuation-stripped form is a stopword.
inline bool is_stopword(std::string_view word) {
    return stopwords().count(exact_key(word)) > 0;
}

}  // namespace promptpress
