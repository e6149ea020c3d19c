#include "echo/urltools.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "echo/errors.hpp"

namespace echo::urltools {

namespace {

// Trimmed snapshot of the public-suffix list: common generic TLDs, the
// country-code families exercised by news domains, and the classic wildcard
// and exception rules. "*" prefixes wildcard rules, "!" marks exceptions.
constexpr std::array<const char*, 78> kPublicSuffixes = {
    "com", "org", "net", "edu", "gov", "mil", "int", "info", "biz", "io",
    "co", "me", "tv", "news", "blog", "online", "site", "app", "dev", "xyz",
    "us", "uk", "fr", "de", "it", "es", "nl", "se", "no", "fi",
    "dk", "pl", "ru", "jp", "cn", "br", "ar", "mx", "ca", "au",
    "nz", "in", "ie", "ch", "at", "be", "pt", "gr", "tr", "eu",
    "co.uk", "org.uk", "ac.uk", "gov.uk", "me.uk",
    "com.au", "net.au", "org.au",
    "co.jp", "ne.jp", "or.jp", "ac.jp",
    "com.br", "org.br", "com.ar", "com.mx", "com.cn",
    "co.in", "co.nz", "org.nz", "com.tr",
    "github.io", "blogspot.com", "wordpress.com",
    "*.ck", "!www.ck",
    "*.bn", "gov.bn",
};

const std::unordered_set<std::string>& shortener_hosts() {
    static const std::unordered_set<std::string> hosts = {
        "bit.ly",  "t.co",    "tinyurl.com", "goo.gl", "ow.ly",
        "buff.ly", "is.gd",   "dlvr.it",     "ift.tt", "trib.al",
    };
    return hosts;
}

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

/// Strips "scheme://" when present; returns the remainder.
std::string without_scheme(const std::string& url) {
    const auto pos = url.find("://");
    return pos == std::string::npos ? url : url.substr(pos + 3);
}

std::string host_of(const std::string& url) {
    std::string rest = without_scheme(url);
    const auto end = rest.find_first_of("/?#");
    std::string host = end == std::string::npos ? rest : rest.substr(0, end);
    const auto port = host.rfind(':');
    if (port != std::string::npos && host.find(']') == std::string::npos) {
        host = host.substr(0, port);
    }
    return lowercase(host);
}

std::vector<std::string> split_labels(const std::string& host) {
    std::vector<std::string> labels;
    std::string current;
    for (char c : host) {
        if (c == '.') {
            labels.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    labels.push_back(current);
    return labels;
}

bool is_ip_host(const std::string& host, const std::vector<std::string>& labels) {
    if (!host.empty() && host.front() == '[') return true;  // IPv6 literal
    return std::all_of(labels.begin(), labels.end(), [](const std::string& label) {
        return !label.empty() &&
               std::all_of(label.begin(), label.end(), [](unsigned char c) { return std::isdigit(c); });
    });
}

// True when `rule` (without its marker) matches the tail of `labels`.
bool rule_matches(const std::vector<std::string>& rule, const std::vector<std::string>& labels) {
    if (rule.size() > labels.size()) return false;
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const std::string& pattern = rule[rule.size() - 1 - k];
        const std::string& label = labels[labels.size() - 1 - k];
        if (pattern != "*" && pattern != label) return false;
    }
    return true;
}

std::string strip_tracking_params(const std::string& url) {
    const auto q = url.find('?');
    if (q == std::string::npos) return url;
    auto fragment = url.find('#', q);
    const std::string query =
        url.substr(q + 1, fragment == std::string::npos ? std::string::npos : fragment - q - 1);
    const std::string tail = fragment == std::string::npos ? "" : url.substr(fragment);

    std::vector<std::string> kept;
    std::string param;
    std::istringstream stream(query);
    while (std::getline(stream, param, '&')) {
        const std::string key = lowercase(param.substr(0, param.find('=')));
        const bool tracking =
            key.rfind("utm_", 0) == 0 || key == "fbclid" || key == "gclid";
        if (!tracking) kept.push_back(param);
    }
    std::string rebuilt = url.substr(0, q);
    for (std::size_t k = 0; k < kept.size(); ++k) {
        rebuilt += (k == 0 ? '?' : '&');
        rebuilt += kept[k];
    }
    return rebuilt + tail;
}

/// Lowercases the scheme and host, leaving path/query/fragment untouched.
std::string lowercase_scheme_host(const std::string& url) {
    const auto scheme_end = url.find("://");
    std::size_t host_start = 0;
    std::string out;
    if (scheme_end != std::string::npos) {
        out = lowercase(url.substr(0, scheme_end)) + "://";
        host_start = scheme_end + 3;
    }
    const auto host_end = url.find_first_of("/?#", host_start);
    const std::string host =
        url.substr(host_start, host_end == std::string::npos ? std::string::npos : host_end - host_start);
    out += lowercase(host);
    if (host_end != std::string::npos) out += url.substr(host_end);
    return out;
}

}  // namespace

UrlResolver make_map_resolver(std::unordered_map<std::string, std::string> map) {
    return [table = std::move(map)](const std::string& url) -> std::optional<std::string> {
        auto it = table.find(url);
        if (it != table.end()) return it->second;
        it = table.find(without_scheme(url));
        if (it != table.end()) return it->second;
        return std::nullopt;
    };
}

namespace {

std::vector<std::vector<std::string>> read_two_column_csv(const std::string& path,
                                                          const char* what) {
    std::ifstream in(path);
    if (!in) throw InputError(std::string(what) + ": cannot open " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw InputError(std::string(what) + ": line " + std::to_string(line_no) +
                             " has no comma");
        }
        rows.push_back({line.substr(0, comma), line.substr(comma + 1)});
    }
    return rows;
}

}  // namespace

std::unordered_map<std::string, std::string> load_url_map(const std::string& path) {
    std::unordered_map<std::string, std::string> map;
    bool first = true;
    for (const auto& row : read_two_column_csv(path, "url map")) {
        if (first && (row[0] == "short" || row[0] == "url")) {
            first = false;
            continue;  // header row
        }
        first = false;
        map[row[0]] = row[1];
    }
    return map;
}

CanonicalUrl canonicalize_url(const std::string& raw, const UrlResolver& resolver, int max_depth) {
    CanonicalUrl result;
    std::string current = raw;
    std::unordered_set<std::string> visited{current};
    bool resolved_cleanly = true;
    for (int depth = 0;; ++depth) {
        if (depth >= max_depth) {
            resolved_cleanly = false;
            break;
        }
        std::optional<std::string> next = resolver ? resolver(current) : std::nullopt;
        if (!next.has_value()) break;
        if (!visited.insert(*next).second) {  // redirect loop
            resolved_cleanly = false;
            break;
        }
        current = *next;
    }

    if (!resolved_cleanly) {
        result.url = raw;
        result.flagged = true;
        return result;
    }
    if (current == raw && shortener_hosts().count(host_of(raw)) > 0) {
        // a known short link the resolver could not expand
        result.url = raw;
        result.flagged = true;
        return result;
    }
    result.url = lowercase_scheme_host(strip_tracking_params(current));
    return result;
}

std::string extract_domain(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw InputError("extract_domain: not a URL: " + url);
    }
    const std::string scheme = lowercase(url.substr(0, scheme_end));
    if (scheme != "http" && scheme != "https") {
        throw InputError("extract_domain: unsupported scheme: " + scheme);
    }
    const std::string host = host_of(url);
    if (host.empty()) throw InputError("extract_domain: empty host");
    const std::vector<std::string> labels = split_labels(host);
    if (is_ip_host(host, labels)) {
        throw InputError("extract_domain: IP address has no registrable domain");
    }
    for (const auto& label : labels) {
        if (label.empty()) throw InputError("extract_domain: malformed host: " + host);
    }

    // Longest matching rule wins; exception rules beat wildcard rules and
    // name a registrable domain directly; no match falls back to "*".
    std::size_t suffix_len = 1;
    std::size_t best_rule_len = 0;
    for (const char* raw_rule : kPublicSuffixes) {
        std::string rule = raw_rule;
        const bool is_exception = rule.front() == '!';
        if (is_exception) rule.erase(0, 1);
        const std::vector<std::string> parts = split_labels(rule);
        if (!rule_matches(parts, labels)) continue;
        if (is_exception) {
            suffix_len = parts.size() - 1;  // the exception itself is registrable
            break;
        }
        if (parts.size() > best_rule_len) {
            best_rule_len = parts.size();
            suffix_len = parts.size();
        }
    }

    if (labels.size() < suffix_len + 1) {
        throw InputError("extract_domain: host is a public suffix: " + host);
    }
    std::string domain;
    for (std::size_t k = labels.size() - suffix_len - 1; k < labels.size(); ++k) {
        if (!domain.empty()) domain += '.';
        domain += labels[k];
    }
    return domain;
}

const char* trust_label_name(TrustLabel label) {
    switch (label) {
        case TrustLabel::T: return "T";
        case TrustLabel::N: return "N";
        case TrustLabel::P: return "P";
        case TrustLabel::S: return "S";
        case TrustLabel::UNC: return "UNC";
    }
    return "UNC";
}

TrustLabel trust_label_from(const std::string& name) {
    std::string upper = name;
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (upper == "T") return TrustLabel::T;
    if (upper == "N") return TrustLabel::N;
    if (upper == "P") return TrustLabel::P;
    if (upper == "S") return TrustLabel::S;
    if (upper == "UNC") return TrustLabel::UNC;
    throw InputError("unknown trust label: " + name);
}

TrustLabelTable load_labels_csv(const std::string& path) {
    TrustLabelTable table;
    bool first = true;
    for (const auto& row : read_two_column_csv(path, "label table")) {
        if (first && row[0] == "domain") {
            first = false;
            continue;
        }
        first = false;
        table[lowercase(row[0])] = trust_label_from(row[1]);
    }
    return table;
}

TrustLabel url_label(const std::string& url, const TrustLabelTable& table) {
    std::string domain;
    try {
        domain = extract_domain(url);
    } catch (const InputError&) {
        return TrustLabel::UNC;
    }
    const auto it = table.find(domain);
    return it == table.end() ? TrustLabel::UNC : it->second;
}

}  // namespace echo::urltools
