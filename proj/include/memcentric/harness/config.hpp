#pragma once

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "memcentric/dram/state.hpp"
#include "memcentric/pnm/model.hpp"
#include "memcentric/pud/exec.hpp"

extern char** environ;

namespace memcentric::harness {

enum class AttackPattern { single, double_sided, many_sided };

inline const char* to_string(AttackPattern p) {
    switch (p) {
    case AttackPattern::single: return "single";
    case AttackPattern::double_sided: return "double";
    case AttackPattern::many_sided: return "many_sided";
    }
    return "?";
}

struct SyntheticWorkload {
    std::uint64_t requests = 10'000;
    std::uint32_t banks = 0;        // spread over the first `banks` banks; 0 means all
    double write_fraction = 0.5;
    Cycle arrival_gap = 0;          // cycles between request arrivals
    bool golden = false;            // also replay without maintenance and compare contents
};

struct WorkloadConfig {
    std::optional<std::filesystem::path> trace;
    std::optional<SyntheticWorkload> synthetic;
    bool host_refresh = true;
};

struct AttackConfig {
    AttackPattern pattern = AttackPattern::double_sided;
    RowAddress aggressor{0, 0, 0, 0, 8};
    std::uint32_t aggressors = 8;            // many_sided
    std::uint32_t spacing = 4;               // many_sided: rows between aggressors
    Cycle hold_cycles = 0;                   // 0: tRAS
    std::uint64_t activations_per_aggressor = 1; // per window
    std::uint64_t windows = 1;
    bool refresh = true;                     // REF after every window
    bool stop_at_first_flip = false;
};

struct PudConfig {
    std::filesystem::path netlist;
    std::optional<std::filesystem::path> operands;
    std::uint64_t random_operands = 0; // lanes of random operands when no operand file is given
    RowAddress subarray{};
    pud::LaneMask lanes;
};

struct TrngConfig {
    std::uint32_t rows = 4;
    std::uint64_t bits = 1'000'000;
    RowAddress first{};
};

struct ScalingConfig {
    std::string unit;
    std::string kernel;
    std::uint32_t max_units = 64;
    bool host_fed = false;
};

struct PnmConfig {
    std::vector<pnm::UnitSpec> units;
    std::vector<pnm::KernelDescriptor> kernels;
    std::optional<ScalingConfig> scaling;
};

struct SweepParameter {
    std::string key; // dotted config path
    std::vector<YAML::Node> values;
};

struct SweepConfig {
    std::string command;
    std::vector<SweepParameter> parameters;
};

struct ControllerConfig {
    Cycle retry_backoff = 0; // 0: timing.nack_retry_backoff
    std::uint32_t max_retries = 10'000;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    DramGeometry geometry;
    TimingParams timing;
    DeviceOptions device;
    pud::NoiseModel noise;
    ControllerConfig controller;
    std::optional<WorkloadConfig> workload;
    std::optional<AttackConfig> attack;
    std::optional<PudConfig> pud;
    std::optional<TrngConfig> trng;
    std::optional<PnmConfig> pnm;
    std::optional<SweepConfig> sweep;
    std::optional<std::filesystem::path> output_path;
    std::string output_format = "csv";

    YAML::Node raw;                   // the document after environment overrides
    std::filesystem::path base_dir;   // relative paths resolve here
};

namespace detail {

inline std::string where(const YAML::Mark& m) {
    if (m.line < 0)
        return " (environment override)";
    return " at line " + std::to_string(m.line + 1);
}

inline std::string lower(std::string s) {
    for (auto& c : s)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

template <typename T>
inline const char* type_name() {
    if constexpr (std::is_same_v<T, bool>)
        return "a boolean";
    else if constexpr (std::is_integral_v<T>)
        return "a non-negative integer";
    else if constexpr (std::is_floating_point_v<T>)
        return "a number";
    else
        return "a string";
}

// Typed scalar conversion with strict integer parsing (no signs, no
// fractions, no overflow).
template <typename T>
inline std::optional<T> convert(const YAML::Node& n) {
    if (!n.IsScalar())
        return std::nullopt;
    const std::string& s = n.Scalar();
    if constexpr (std::is_same_v<T, bool>) {
        bool b;
        if (YAML::convert<bool>::decode(n, b))
            return b;
        return std::nullopt;
    } else if constexpr (std::is_integral_v<T>) {
        if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '_'; }))
            return std::nullopt;
        std::string digits;
        for (char c : s)
            if (c != '_')
                digits += c;
        errno = 0;
        char* end = nullptr;
        const unsigned long long v = std::strtoull(digits.c_str(), &end, 10);
        if (errno || *end || v > static_cast<unsigned long long>(std::numeric_limits<T>::max()))
            return std::nullopt;
        return static_cast<T>(v);
    } else if constexpr (std::is_floating_point_v<T>) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (s.empty() || *end || !std::isfinite(v))
            return std::nullopt;
        return static_cast<T>(v);
    } else {
        return s;
    }
}

inline const YAML::Node& empty_map() {
    static const YAML::Node m(YAML::NodeType::Map);
    return m;
}

} // namespace detail

// Strict view of one YAML mapping: every key must be read by the parser,
// leftovers are reported as unknown keys.
class Section {
  public:
    Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
        if (node_ && !node_.IsNull() && !node_.IsMap())
            throw ConfigError("'" + path_ + "'" + detail::where(node_.Mark()) + " must be a mapping");
    }

    bool present() const { return node_ && node_.IsMap(); }
    bool has(const std::string& key) const { return present() && static_cast<const YAML::Node&>(node_)[key]; }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    // Invalid (false) node when the key or the whole section is absent.
    YAML::Node raw(const std::string& key) {
        seen_.insert(key);
        const YAML::Node& n = present() ? node_ : detail::empty_map();
        return n[key];
    }

    template <typename T>
    std::optional<T> opt(const std::string& key) {
        YAML::Node n = raw(key);
        if (!n)
            return std::nullopt;
        auto v = detail::convert<T>(n);
        if (!v)
            throw ConfigError("key '" + key_path(key) + "'" + detail::where(n.Mark()) + ": expected " +
                              detail::type_name<T>());
        return v;
    }

    template <typename T>
    T get(const std::string& key, T def) {
        return opt<T>(key).value_or(def);
    }

    template <typename T>
    T require(const std::string& key, const std::string& why = "") {
        auto v = opt<T>(key);
        if (!v)
            throw ConfigError("missing key '" + key_path(key) + "'" + (why.empty() ? "" : " (" + why + ")") +
                              (present() ? detail::where(node_.Mark()) : ""));
        return *v;
    }

    Section child(const std::string& key) { return Section(raw(key), key_path(key)); }

    void finish() const {
        if (!present())
            return;
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            const std::string k = it->first.Scalar();
            if (!seen_.count(k))
                throw ConfigError("unknown key '" + key_path(k) + "'" + detail::where(it->first.Mark()));
        }
    }

    const YAML::Node& node() const { return node_; }

  private:
    YAML::Node node_;
    std::string path_;
    std::set<std::string> seen_;
};

// Every key the parser understands, for mapping case-insensitive
// environment variable names back to their spelling.
inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "seed", "geometry", "channels", "ranks_per_channel", "banks_per_rank", "subarrays_per_bank",
        "rows_per_subarray", "columns_per_row", "timing", "clock_ns", "tRCD", "tRAS", "tRP", "tRC", "tRFC", "tBURST",
        "tREFI", "tREFW", "nack_retry_backoff", "disturbance", "enabled", "acmin_log_mean", "acmin_median",
        "acmin_log_sigma", "press_alpha", "press_ton_ref", "vrd_ratio_max", "blast_weights", "flips_per_event",
        "fixture_acmin", "mitigation", "kind", "p", "sampler_slots", "per_refresh_checks", "threshold",
        "recovery_cycles", "victims_refreshed", "smd", "scope", "blocking", "refresh_duration", "rh_duration",
        "scrub_duration", "refresh_period", "scrub_period", "rh_threshold", "rh_trigger_fraction", "track_reference",
        "noise", "p_copy", "p_logic", "p_not", "controller", "retry_backoff", "max_retries", "workload", "trace",
        "synthetic", "host_refresh", "requests", "banks", "write_fraction", "arrival_gap", "golden", "attack",
        "pattern", "bank", "subarray", "row", "aggressors", "spacing", "hold_cycles", "activations_per_aggressor",
        "windows", "refresh", "stop_at_first_flip", "pud", "netlist", "operands", "random_operands", "lanes",
        "trng", "rows", "bits", "pnm", "units", "kernels", "scaling", "unit", "kernel", "max_units", "host_fed",
        "name", "class", "peak_compute", "mem_bandwidth", "capacity", "link_bandwidth", "energy_per_op",
        "energy_per_byte", "compute_ops", "bytes_touched", "resident_unit", "sweep", "command", "parameters",
        "output", "path", "format", "channel", "rank"};
    return keys;
}

inline std::string canonical_key(const std::string& segment) {
    const std::string l = detail::lower(segment);
    for (const auto& k : known_keys())
        if (detail::lower(k) == l)
            return k;
    return l;
}

// Sets the node at a dotted path, creating mappings on the way.
inline void set_path(YAML::Node root, const std::vector<std::string>& path, const YAML::Node& value) {
    YAML::Node cur = root;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        YAML::Node next = cur[path[i]];
        if (!next || !next.IsMap()) {
            cur[path[i]] = YAML::Node(YAML::NodeType::Map);
            next = cur[path[i]];
        }
        cur.reset(next);
    }
    cur[path.back()] = value;
}

inline std::vector<std::string> split(const std::string& s, const std::string& sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    for (;;) {
        const auto next = s.find(sep, pos);
        out.push_back(s.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
        if (next == std::string::npos)
            return out;
        pos = next + sep.size();
    }
}

inline constexpr const char* kEnvPrefix = "MEMCENTRIC_";

// MEMCENTRIC_SECTION__KEY=value overrides section.key; the value is parsed
// as YAML, so lists and numbers work.
inline void apply_env_overrides(YAML::Node root, const std::map<std::string, std::string>& env) {
    const std::string prefix = kEnvPrefix;
    for (const auto& [name, value] : env) {
        if (name.rfind(prefix, 0) != 0)
            continue;
        std::vector<std::string> path;
        for (const auto& seg : split(name.substr(prefix.size()), "__")) {
            if (seg.empty())
                throw ConfigError("malformed override variable " + name);
            path.push_back(canonical_key(seg));
        }
        YAML::Node v;
        try {
            v = YAML::Load(value);
        } catch (const YAML::Exception& e) {
            throw ConfigError("override " + name + ": " + e.msg);
        }
        set_path(root, path, v);
    }
}

inline std::map<std::string, std::string> process_env() {
    std::map<std::string, std::string> env;
    for (char** e = environ; e && *e; ++e) {
        const std::string kv = *e;
        const auto eq = kv.find('=');
        if (eq != std::string::npos && kv.rfind(kEnvPrefix, 0) == 0)
            env[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return env;
}

namespace detail {

inline RowAddress parse_address(Section& s, RowAddress def) {
    def.channel = s.get<std::uint32_t>("channel", def.channel);
    def.rank = s.get<std::uint32_t>("rank", def.rank);
    def.bank = s.get<std::uint32_t>("bank", def.bank);
    def.subarray = s.get<std::uint32_t>("subarray", def.subarray);
    def.row = s.get<std::uint32_t>("row", def.row);
    return def;
}

inline void parse_geometry(Section s, DramGeometry& g) {
    g.channels = s.get("channels", g.channels);
    g.ranks_per_channel = s.get("ranks_per_channel", g.ranks_per_channel);
    g.banks_per_rank = s.get("banks_per_rank", g.banks_per_rank);
    g.subarrays_per_bank = s.get("subarrays_per_bank", g.subarrays_per_bank);
    g.rows_per_subarray = s.get("rows_per_subarray", g.rows_per_subarray);
    g.columns_per_row = s.get("columns_per_row", g.columns_per_row);
    s.finish();
}

inline void parse_timing(Section s, TimingParams& t) {
    t.clock_ns = s.get("clock_ns", t.clock_ns);
    t.tRCD = s.get("tRCD", t.tRCD);
    t.tRAS = s.get("tRAS", t.tRAS);
    t.tRP = s.get("tRP", t.tRP);
    t.tRC = s.get("tRC", t.tRAS + t.tRP);
    t.tRFC = s.get("tRFC", t.tRFC);
    t.tBURST = s.get("tBURST", t.tBURST);
    t.tREFI = s.get("tREFI", t.tREFI);
    t.tREFW = s.get("tREFW", t.tREFW);
    t.nack_retry_backoff = s.get("nack_retry_backoff", t.nack_retry_backoff);
    s.finish();
}

inline void parse_disturbance(Section s, disturbance::DisturbanceProfile& p) {
    p.enabled = s.get("enabled", s.present());
    if (s.has("acmin_median") && s.has("acmin_log_mean"))
        throw ConfigError("disturbance: give acmin_median or acmin_log_mean, not both");
    if (auto m = s.opt<double>("acmin_median")) {
        if (!(*m > 0))
            throw ConfigError("disturbance.acmin_median must be > 0");
        p.acmin_log_mean = std::log(*m);
    }
    p.acmin_log_mean = s.get("acmin_log_mean", p.acmin_log_mean);
    p.acmin_log_sigma = s.get("acmin_log_sigma", p.acmin_log_sigma);
    p.press_alpha = s.get("press_alpha", p.press_alpha);
    p.press_ton_ref = s.get("press_ton_ref", p.press_ton_ref);
    p.flips_per_event = s.get("flips_per_event", p.flips_per_event);
    if (auto f = s.opt<double>("fixture_acmin")) {
        if (s.has("acmin_median") || s.has("acmin_log_mean") || s.has("acmin_log_sigma"))
            throw ConfigError("disturbance.fixture_acmin replaces the AC_min distribution keys");
        if (!(*f > 0))
            throw ConfigError("disturbance.fixture_acmin must be > 0");
        p.acmin_log_mean = std::log(*f);
        p.acmin_log_sigma = 0.0;
        p.vrd_ratio_max = 1.0;
    }
    p.vrd_ratio_max = s.get("vrd_ratio_max", p.vrd_ratio_max);
    if (YAML::Node w = s.raw("blast_weights")) {
        if (!w.IsSequence() || w.size() != 2)
            throw ConfigError("key 'disturbance.blast_weights'" + where(w.Mark()) + ": expected [w1, w2]");
        for (std::size_t i = 0; i < 2; ++i) {
            auto v = convert<double>(w[i]);
            if (!v)
                throw ConfigError("key 'disturbance.blast_weights'" + where(w[i].Mark()) + ": expected a number");
            p.blast_weights[i] = *v;
        }
    }
    s.finish();
}

inline void parse_mitigation(Section s, mitigation::MitigationConfig& m) {
    const std::string kind = s.get<std::string>("kind", "none");
    if (kind == "none") {
        m.kind = std::monostate{};
    } else if (kind == "para") {
        m.kind = mitigation::Para{s.require<double>("p", "required for kind para")};
    } else if (kind == "trr") {
        mitigation::Trr t;
        t.sampler_slots = s.require<std::uint32_t>("sampler_slots", "required for kind trr");
        t.per_refresh_checks = s.get("per_refresh_checks", t.per_refresh_checks);
        m.kind = t;
    } else if (kind == "prac") {
        mitigation::Prac pr;
        pr.threshold = s.require<std::uint32_t>("threshold", "required for kind prac");
        pr.recovery_cycles = s.get("recovery_cycles", pr.recovery_cycles);
        pr.victims_refreshed = s.get("victims_refreshed", pr.victims_refreshed);
        m.kind = pr;
    } else {
        throw ConfigError("key 'mitigation.kind': unknown kind '" + kind + "' (none, para, trr, prac)");
    }
    s.finish();
}

inline void parse_smd(Section s, smd::SmdConfig& c) {
    c.enabled = s.get("enabled", s.present());
    const std::string scope = s.get<std::string>("scope", to_string(c.scope));
    if (scope == "subarray")
        c.scope = RegionScope::subarray;
    else if (scope == "bank")
        c.scope = RegionScope::bank;
    else
        throw ConfigError("key 'smd.scope': expected subarray or bank, got '" + scope + "'");
    c.blocking = s.get("blocking", c.blocking);
    c.refresh_duration = s.get("refresh_duration", c.refresh_duration);
    c.rh_duration = s.get("rh_duration", c.rh_duration);
    c.scrub_duration = s.get("scrub_duration", c.scrub_duration);
    c.refresh_period = s.get("refresh_period", c.refresh_period);
    c.scrub_period = s.get("scrub_period", c.scrub_period);
    c.rh_threshold = s.get("rh_threshold", c.rh_threshold);
    c.rh_trigger_fraction = s.get("rh_trigger_fraction", c.rh_trigger_fraction);
    c.track_reference = s.get("track_reference", c.track_reference);
    s.finish();
}

inline void parse_noise(Section s, pud::NoiseModel& n) {
    n.enabled = s.get("enabled", s.present());
    n.p_copy = s.get("p_copy", n.p_copy);
    n.p_logic = s.get("p_logic", n.p_logic);
    n.p_not = s.get("p_not", n.p_not);
    s.finish();
    n.validate();
}

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path q(p);
    return q.is_absolute() ? q : base / q;
}

inline WorkloadConfig parse_workload(Section s, const std::filesystem::path& base) {
    WorkloadConfig w;
    if (auto t = s.opt<std::string>("trace"))
        w.trace = resolve(base, *t);
    Section syn = s.child("synthetic");
    if (syn.present()) {
        SyntheticWorkload y;
        y.requests = syn.get("requests", y.requests);
        y.banks = syn.get("banks", y.banks);
        y.write_fraction = syn.get("write_fraction", y.write_fraction);
        y.arrival_gap = syn.get("arrival_gap", y.arrival_gap);
        y.golden = syn.get("golden", y.golden);
        syn.finish();
        if (!(y.write_fraction >= 0 && y.write_fraction <= 1))
            throw ConfigError("workload.synthetic.write_fraction must be in [0, 1]");
        w.synthetic = y;
    }
    if (w.trace.has_value() == w.synthetic.has_value())
        throw ConfigError("workload: give exactly one of 'trace' or 'synthetic'");
    w.host_refresh = s.get("host_refresh", w.host_refresh);
    s.finish();
    return w;
}

inline AttackConfig parse_attack(Section s) {
    AttackConfig a;
    const std::string pat = s.get<std::string>("pattern", to_string(a.pattern));
    if (pat == "single")
        a.pattern = AttackPattern::single;
    else if (pat == "double")
        a.pattern = AttackPattern::double_sided;
    else if (pat == "many_sided")
        a.pattern = AttackPattern::many_sided;
    else
        throw ConfigError("key 'attack.pattern': expected single, double or many_sided, got '" + pat + "'");
    a.aggressor = parse_address(s, a.aggressor);
    a.aggressors = s.get("aggressors", a.aggressors);
    a.spacing = s.get("spacing", a.spacing);
    a.hold_cycles = s.get("hold_cycles", a.hold_cycles);
    a.activations_per_aggressor = s.get("activations_per_aggressor", a.activations_per_aggressor);
    a.windows = s.get("windows", a.windows);
    a.refresh = s.get("refresh", a.refresh);
    a.stop_at_first_flip = s.get("stop_at_first_flip", a.stop_at_first_flip);
    s.finish();
    if (a.aggressors < 1 || a.spacing < 1 || a.windows < 1 || a.activations_per_aggressor < 1)
        throw ConfigError("attack: aggressors, spacing, windows and activations_per_aggressor must be >= 1");
    return a;
}

inline PudConfig parse_pud(Section s, const std::filesystem::path& base) {
    PudConfig p;
    p.netlist = resolve(base, s.require<std::string>("netlist"));
    if (auto o = s.opt<std::string>("operands"))
        p.operands = resolve(base, *o);
    p.random_operands = s.get("random_operands", p.random_operands);
    if (p.operands.has_value() == (p.random_operands > 0))
        throw ConfigError("pud: give exactly one of 'operands' or 'random_operands'");
    p.subarray = parse_address(s, p.subarray);
    if (YAML::Node l = s.raw("lanes")) {
        auto lo = l.IsSequence() && l.size() == 2 ? convert<std::uint32_t>(l[0]) : std::nullopt;
        auto hi = l.IsSequence() && l.size() == 2 ? convert<std::uint32_t>(l[1]) : std::nullopt;
        if (!lo || !hi)
            throw ConfigError("key 'pud.lanes'" + where(l.Mark()) + ": expected [begin, end]");
        p.lanes = {*lo, *hi};
    }
    s.finish();
    return p;
}

inline TrngConfig parse_trng(Section s) {
    TrngConfig t;
    t.rows = s.get("rows", t.rows);
    t.bits = s.get("bits", t.bits);
    t.first = parse_address(s, t.first);
    s.finish();
    return t;
}

inline PnmConfig parse_pnm(Section s) {
    PnmConfig p;
    YAML::Node units = s.raw("units");
    if (!units || !units.IsSequence() || units.size() == 0)
        throw ConfigError("missing key 'pnm.units' (a non-empty list)");
    for (std::size_t i = 0; i < units.size(); ++i) {
        Section u(units[i], "pnm.units[" + std::to_string(i) + "]");
        pnm::UnitSpec spec;
        spec.name = u.require<std::string>("name");
        const std::string cls = u.require<std::string>("class");
        if (cls == "FC_PIM")
            spec.cls = pnm::UnitClass::FC_PIM;
        else if (cls == "ATTN_PIM")
            spec.cls = pnm::UnitClass::ATTN_PIM;
        else if (cls == "PU")
            spec.cls = pnm::UnitClass::PU;
        else
            throw ConfigError("key '" + u.key_path("class") + "': expected FC_PIM, ATTN_PIM or PU");
        spec.peak_compute = u.require<double>("peak_compute");
        spec.mem_bandwidth = u.require<double>("mem_bandwidth");
        spec.capacity = u.require<double>("capacity");
        spec.link_bandwidth = u.require<double>("link_bandwidth");
        spec.energy_per_op = u.get("energy_per_op", 0.0);
        spec.energy_per_byte = u.get("energy_per_byte", 0.0);
        u.finish();
        p.units.push_back(spec);
    }
    YAML::Node kernels = s.raw("kernels");
    if (kernels) {
        if (!kernels.IsSequence())
            throw ConfigError("key 'pnm.kernels'" + where(kernels.Mark()) + ": expected a list");
        for (std::size_t i = 0; i < kernels.size(); ++i) {
            Section k(kernels[i], "pnm.kernels[" + std::to_string(i) + "]");
            pnm::KernelDescriptor d;
            d.name = k.require<std::string>("name");
            d.compute_ops = k.require<double>("compute_ops");
            d.bytes_touched = k.require<double>("bytes_touched");
            d.resident_unit = k.get<std::string>("resident_unit", "");
            k.finish();
            d.validate();
            p.kernels.push_back(d);
        }
    }
    Section sc = s.child("scaling");
    if (sc.present()) {
        ScalingConfig c;
        c.unit = sc.require<std::string>("unit");
        c.kernel = sc.require<std::string>("kernel");
        c.max_units = sc.get("max_units", c.max_units);
        c.host_fed = sc.get("host_fed", c.host_fed);
        sc.finish();
        p.scaling = c;
    }
    s.finish();
    pnm::validate_units(p.units);
    return p;
}

inline SweepConfig parse_sweep(Section s) {
    SweepConfig w;
    w.command = s.require<std::string>("command");
    if (w.command == "sweep")
        throw ConfigError("sweep.command cannot be sweep");
    YAML::Node params = s.raw("parameters");
    if (!params || !params.IsMap() || params.size() == 0)
        throw ConfigError("missing key 'sweep.parameters' (a mapping of dotted keys to value lists)");
    for (auto it = params.begin(); it != params.end(); ++it) {
        SweepParameter p;
        p.key = it->first.Scalar();
        if (p.key.rfind("sweep", 0) == 0 || p.key == "seed" || p.key.empty())
            throw ConfigError("sweep parameter '" + p.key + "'" + where(it->first.Mark()) + " cannot be swept");
        if (!it->second.IsSequence() || it->second.size() == 0)
            throw ConfigError("sweep parameter '" + p.key + "'" + where(it->second.Mark()) +
                              ": expected a non-empty list");
        for (const auto& v : it->second)
            p.values.push_back(v);
        w.parameters.push_back(std::move(p));
    }
    s.finish();
    return w;
}

} // namespace detail

// Builds a validated configuration from an already loaded document.
inline ExperimentConfig config_from_yaml(YAML::Node root, const std::filesystem::path& base_dir) {
    if (!root || root.IsNull())
        throw ConfigError("empty configuration");
    Section top(root, "");
    ExperimentConfig c;
    c.raw = root;
    c.base_dir = base_dir;
    c.seed = top.require<std::uint64_t>("seed");
    detail::parse_geometry(top.child("geometry"), c.geometry);
    detail::parse_timing(top.child("timing"), c.timing);
    detail::parse_disturbance(top.child("disturbance"), c.device.disturbance);
    detail::parse_mitigation(top.child("mitigation"), c.device.mitigation);
    detail::parse_smd(top.child("smd"), c.device.smd);
    detail::parse_noise(top.child("noise"), c.noise);
    {
        Section ctl = top.child("controller");
        c.controller.retry_backoff = ctl.get("retry_backoff", c.controller.retry_backoff);
        c.controller.max_retries = ctl.get("max_retries", c.controller.max_retries);
        ctl.finish();
    }
    if (Section w = top.child("workload"); w.present())
        c.workload = detail::parse_workload(w, base_dir);
    if (Section a = top.child("attack"); a.present())
        c.attack = detail::parse_attack(a);
    if (Section p = top.child("pud"); p.present())
        c.pud = detail::parse_pud(p, base_dir);
    if (Section t = top.child("trng"); t.present())
        c.trng = detail::parse_trng(t);
    if (Section p = top.child("pnm"); p.present())
        c.pnm = detail::parse_pnm(p);
    if (Section s = top.child("sweep"); s.present())
        c.sweep = detail::parse_sweep(s);
    {
        Section out = top.child("output");
        if (auto p = out.opt<std::string>("path"))
            c.output_path = detail::resolve(base_dir, *p);
        c.output_format = out.get<std::string>("format", c.output_format);
        out.finish();
    }
    top.finish();

    c.geometry.validate();
    c.timing.validate();
    c.device.validate();
    return c;
}

inline YAML::Node load_yaml_text(const std::string& text) {
    try {
        return YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ParseError(e.msg, static_cast<std::size_t>(e.mark.line + 1));
    }
}

inline YAML::Node load_yaml_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        throw ConfigError("config file '" + path.string() + "' does not exist");
    try {
        return YAML::LoadFile(path.string());
    } catch (const YAML::ParserException& e) {
        throw ParseError(path.string() + ": " + e.msg, static_cast<std::size_t>(e.mark.line + 1));
    } catch (const YAML::BadFile&) {
        throw ConfigError("cannot read config file '" + path.string() + "'");
    }
}

inline ExperimentConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = ".",
                                          const std::map<std::string, std::string>& env = {}) {
    YAML::Node root = load_yaml_text(text);
    if (root.IsMap())
        apply_env_overrides(root, env);
    return config_from_yaml(root, base_dir);
}

inline ExperimentConfig parse_config(const std::filesystem::path& path,
                                     const std::map<std::string, std::string>& env) {
    YAML::Node root = load_yaml_file(path);
    if (root.IsMap())
        apply_env_overrides(root, env);
    return config_from_yaml(root, path.parent_path().empty() ? "." : path.parent_path());
}

// Reads overrides from the process environment.
inline ExperimentConfig parse_config(const std::filesystem::path& path) { return parse_config(path, process_env()); }

} // namespace memcentric::harness
