#pragma once

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

// URL handling: canonicalization of (possibly shortened) links through a
// pluggable resolver, registrable-domain extraction against a bundled
// public-suffix snapshot, and the trust-label table.

namespace echo::urltools {

/// Maps a URL to its redirect target, or nothing when unknown. The shipped
/// implementation is a static lookup table; a live redirect follower can be
/// plugged in through the same signature.
using UrlResolver = std::function<std::optional<std::string>(const std::string&)>;

/// Resolver over a fixed {short form → target} map. Lookups try the exact
/// string and the scheme-less form, so map keys may omit the scheme.
UrlResolver make_map_resolver(std::unordered_map<std::string, std::string> map);

/// Loads a two-column CSV (short,target; header optional) into a resolver map.
std::unordered_map<std::string, std::string> load_url_map(const std::string& path);

struct CanonicalUrl {
    std::string url;
    bool flagged = false;  // unresolved shortener, redirect loop, or depth cap
};

/// Follows the resolver up to `max_depth` hops, strips tracking query
/// parameters (utm_*, fbclid, gclid), and lowercases scheme and host.
/// Idempotent on its own outputs. Never throws on weird input: a link on a
/// known shortener host that the resolver cannot resolve keeps its raw form
/// and is flagged, as are loops and over-deep chains.
CanonicalUrl canonicalize_url(const std::string& raw, const UrlResolver& resolver,
                              int max_depth = 10);

/// Registrable (second-level) domain of an http(s) URL, per the bundled
/// public-suffix rules: `https://www.nytimes.com/a` → `nytimes.com`.
/// Throws InputError for non-http(s) schemes, bare strings, IP hosts, and
/// hosts that are themselves a public suffix.
std::string extract_domain(const std::string& url);

enum class TrustLabel { T, N, P, S, UNC };

const char* trust_label_name(TrustLabel label);
TrustLabel trust_label_from(const std::string& name);

/// domain → label; anything absent is UNC at lookup time.
using TrustLabelTable = std::unordered_map<std::string, TrustLabel>;

/// Loads a two-column CSV (domain,label; header optional).
TrustLabelTable load_labels_csv(const std::string& path);

/// Label for a canonical URL: extract_domain then table lookup; URLs whose
/// domain cannot be extracted are UNC.
TrustLabel url_label(const std::string& url, const TrustLabelTable& table);

}  // namespace echo::urltools
