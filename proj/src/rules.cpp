#include "dnp3ids/rules.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace dnp3ids::rules {

namespace {

bool is_hex_digit(char c) {
    return std::isxdigit(static_cast<unsigned char>(c)) != 0;
}

std::uint8_t hex_pair(char hi, char lo) {
    auto nib = [](char c) -> std::uint8_t {
        if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
        if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
        return static_cast<std::uint8_t>(c - 'A' + 10);
    };
    return static_cast<std::uint8_t>(nib(hi) << 4 | nib(lo));
}

std::uint64_t parse_uint(const std::string& s, const char* what, std::uint64_t max) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size() || v > max)
        throw SyntaxError(std::string("bad ") + what + " '" + s + "'");
    return v;
}

AddrExpr parse_addr(std::string tok) {
    AddrExpr e;
    if (!tok.empty() && tok.front() == '!') {
        e.negate = true;
        tok.erase(0, 1);
    }
    if (tok.empty()) throw SyntaxError("empty address expression");
    if (tok == "any") {
        e.any = true;
        e.resolved = true;
        return e;
    }
    if (tok.front() == '$') {
        e.var = tok.substr(1);
        if (e.var.empty()) throw SyntaxError("empty variable name");
        return e;
    }
    std::vector<std::string> parts;
    if (tok.front() == '[') {
        if (tok.back() != ']') throw SyntaxError("unterminated address list '" + tok + "'");
        parts = util::split(tok.substr(1, tok.size() - 2), ',');
    } else {
        parts.push_back(tok);
    }
    for (auto& p : parts) {
        auto c = util::parse_cidr(util::trim(p));
        if (!c) throw SyntaxError("bad address '" + p + "'");
        e.cidrs.push_back(*c);
    }
    if (e.cidrs.empty()) throw SyntaxError("empty address list");
    e.resolved = true;
    return e;
}

PortExpr parse_port(std::string tok) {
    PortExpr e;
    if (!tok.empty() && tok.front() == '!') {
        e.negate = true;
        tok.erase(0, 1);
    }
    if (tok.empty()) throw SyntaxError("empty port expression");
    if (tok == "any") {
        e.any = true;
        return e;
    }
    std::vector<std::string> parts;
    if (tok.front() == '[') {
        if (tok.back() != ']') throw SyntaxError("unterminated port list '" + tok + "'");
        parts = util::split(tok.substr(1, tok.size() - 2), ',');
    } else {
        parts.push_back(tok);
    }
    for (auto& p : parts)
        e.ports.push_back(static_cast<std::uint16_t>(parse_uint(util::trim(p), "port", 65535)));
    if (e.ports.empty()) throw SyntaxError("empty port list");
    return e;
}

// splits the option body on ';', ignoring separators inside quotes
std::vector<std::string> split_options(const std::string& body) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (char c : body) {
        if (c == '"') quoted = !quoted;
        if (c == ';' && !quoted) {
            auto t = util::trim(cur);
            if (!t.empty()) out.push_back(t);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw SyntaxError("unterminated quote in options");
    auto t = util::trim(cur);
    if (!t.empty()) out.push_back(t);
    return out;
}

std::string unquote(const std::string& v, const char* what) {
    if (v.size() < 2 || v.front() != '"' || v.back() != '"')
        throw SyntaxError(std::string(what) + " value must be quoted: '" + v + "'");
    return v.substr(1, v.size() - 2);
}

void append_hex_run(const std::string& run, std::vector<std::uint8_t>& out) {
    std::string digits;
    for (char c : run) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (!is_hex_digit(c)) throw SyntaxError("bad hex content '" + run + "'");
        digits += c;
    }
    if (digits.empty() || digits.size() % 2 != 0)
        throw SyntaxError("odd hex content '" + run + "'");
    for (std::size_t i = 0; i < digits.size(); i += 2)
        out.push_back(hex_pair(digits[i], digits[i + 1]));
}

ContentOpt parse_content(const std::string& quoted) {
    ContentOpt c;
    if (quoted.empty()) throw SyntaxError("empty content");
    if (quoted.find('|') != std::string::npos) {
        bool in_hex = false;
        bool literal_seen = false;
        std::string run;
        for (char ch : quoted) {
            if (ch == '|') {
                if (in_hex) append_hex_run(run, c.bytes);
                run.clear();
                in_hex = !in_hex;
            } else if (in_hex) {
                run += ch;
            } else {
                c.bytes.push_back(static_cast<std::uint8_t>(ch));
                literal_seen = true;
            }
        }
        if (in_hex) throw SyntaxError("unterminated hex segment in content");
        c.hex_form = !literal_seen;
    } else {
        // a string of whitespace-separated hex pairs denotes raw octets
        std::istringstream iss(quoted);
        std::vector<std::string> toks;
        std::string t;
        while (iss >> t) toks.push_back(t);
        bool all_pairs = !toks.empty();
        for (const auto& tok : toks)
            all_pairs = all_pairs && tok.size() == 2 && is_hex_digit(tok[0]) && is_hex_digit(tok[1]);
        if (all_pairs) {
            for (const auto& tok : toks) c.bytes.push_back(hex_pair(tok[0], tok[1]));
            c.hex_form = true;
        } else {
            c.bytes.assign(quoted.begin(), quoted.end());
        }
    }
    if (c.bytes.empty()) throw SyntaxError("empty content");
    return c;
}

FlowOpt parse_flow(const std::string& v) {
    FlowOpt f;
    bool saw = false;
    for (auto& tok : util::split(v, ',')) {
        auto t = util::trim(tok);
        if (t == "established") f.established = true;
        else if (t == "not_established") f.not_established = true;
        else if (t == "to_server") f.to_server = true;
        else if (t == "to_client") f.to_client = true;
        else throw SyntaxError("bad flow token '" + t + "'");
        saw = true;
    }
    if (!saw) throw SyntaxError("empty flow option");
    if (f.established && f.not_established)
        throw SyntaxError("flow cannot be both established and not_established");
    return f;
}

ThresholdOpt parse_threshold(const std::string& v) {
    ThresholdOpt th;
    bool have_type = false, have_track = false, have_count = false, have_seconds = false;
    for (auto& part : util::split(v, ',')) {
        auto p = util::trim(part);
        auto sp = p.find_first_of(" \t");
        if (sp == std::string::npos) throw SyntaxError("bad threshold clause '" + p + "'");
        std::string key = p.substr(0, sp);
        std::string val = util::trim(p.substr(sp + 1));
        if (key == "type") {
            if (val == "limit") th.type = ThresholdType::limit;
            else if (val == "threshold") th.type = ThresholdType::every;
            else if (val == "both") th.type = ThresholdType::both;
            else throw SyntaxError("bad threshold type '" + val + "'");
            have_type = true;
        } else if (key == "track") {
            std::string norm;
            for (char c : val)
                if (c != ' ' && c != '_') norm += c;
            if (norm == "bysrc") th.track = ThresholdTrack::by_src;
            else if (norm == "bydst") th.track = ThresholdTrack::by_dst;
            else throw SyntaxError("bad threshold track '" + val + "'");
            have_track = true;
        } else if (key == "count") {
            th.count = static_cast<std::uint32_t>(parse_uint(val, "threshold count", 1u << 30));
            have_count = true;
        } else if (key == "seconds") {
            th.seconds = static_cast<std::uint32_t>(parse_uint(val, "threshold seconds", 1u << 30));
            have_seconds = true;
        } else {
            throw SyntaxError("bad threshold clause '" + p + "'");
        }
    }
    if (!have_type || !have_track || !have_count || !have_seconds)
        throw SyntaxError("threshold needs type, track, count and seconds");
    if (th.count == 0 || th.seconds == 0)
        throw SyntaxError("threshold count and seconds must be positive");
    return th;
}

std::string render_addr(const AddrExpr& e) {
    std::string s;
    if (e.negate) s += '!';
    if (e.any) return s + "any";
    if (!e.var.empty()) return s + "$" + e.var;
    if (e.cidrs.size() == 1) return s + util::format_cidr(e.cidrs[0]);
    s += '[';
    for (std::size_t i = 0; i < e.cidrs.size(); ++i) {
        if (i) s += ',';
        s += util::format_cidr(e.cidrs[i]);
    }
    s += ']';
    return s;
}

std::string render_port(const PortExpr& e) {
    std::string s;
    if (e.negate) s += '!';
    if (e.any) return s + "any";
    if (e.ports.size() == 1) return s + std::to_string(e.ports[0]);
    s += '[';
    for (std::size_t i = 0; i < e.ports.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(e.ports[i]);
    }
    s += ']';
    return s;
}

std::string render_content_value(const ContentOpt& c) {
    static const char* hexd = "0123456789ABCDEF";
    std::string s = "\"";
    if (c.hex_form) {
        s += ' ';
        for (std::size_t i = 0; i < c.bytes.size(); ++i) {
            if (i) s += ' ';
            s += hexd[c.bytes[i] >> 4];
            s += hexd[c.bytes[i] & 0xF];
        }
        s += ' ';
    } else {
        bool in_hex = false;
        for (std::uint8_t b : c.bytes) {
            const bool printable = b >= 0x20 && b <= 0x7E && b != '"' && b != '|';
            if (printable) {
                if (in_hex) {
                    s += '|';
                    in_hex = false;
                }
                s += static_cast<char>(b);
            } else {
                if (!in_hex) {
                    s += '|';
                    in_hex = true;
                } else {
                    s += ' ';
                }
                s += hexd[b >> 4];
                s += hexd[b & 0xF];
            }
        }
        if (in_hex) s += '|';
    }
    s += '"';
    return s;
}

std::string render_threshold(const ThresholdOpt& th) {
    std::string s = "threshold:type ";
    switch (th.type) {
        case ThresholdType::limit: s += "limit"; break;
        case ThresholdType::every: s += "threshold"; break;
        case ThresholdType::both: s += "both"; break;
    }
    s += ", track ";
    s += th.track == ThresholdTrack::by_src ? "by_src" : "by_dst";
    s += ", count " + std::to_string(th.count);
    s += ", seconds " + std::to_string(th.seconds);
    return s;
}

std::string render_flow(const FlowOpt& f) {
    std::vector<std::string> toks;
    if (f.established) toks.push_back("established");
    if (f.not_established) toks.push_back("not_established");
    if (f.to_server) toks.push_back("to_server");
    if (f.to_client) toks.push_back("to_client");
    std::string s = "flow:";
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) s += ',';
        s += toks[i];
    }
    return s;
}

bool content_match(const ContentOpt& c, std::span<const std::uint8_t> payload) {
    if (c.offset > payload.size()) return false;
    std::size_t end = payload.size();
    if (c.depth) {
        if (*c.depth < c.bytes.size()) return false;
        end = std::min(end, c.offset + *c.depth);
    }
    if (end - c.offset < c.bytes.size()) return false;
    auto first = payload.begin() + static_cast<std::ptrdiff_t>(c.offset);
    auto last = payload.begin() + static_cast<std::ptrdiff_t>(end);
    return std::search(first, last, c.bytes.begin(), c.bytes.end()) != last;
}

bool flow_match(const FlowOpt& f, const std::optional<flow::FlowVerdict>& v) {
    if (!v) return false;
    if (f.established && !v->established) return false;
    if (f.not_established && v->established) return false;
    if (f.to_server && !v->to_server) return false;
    if (f.to_client && v->to_server) return false;
    return true;
}

// advances the tumbling window for this key and reports whether to fire
bool threshold_fire(ThresholdState& st, const Rule& r, const ThresholdOpt& th,
                    const net::ParsedPacket& pkt) {
    const std::uint32_t ip =
        th.track == ThresholdTrack::by_src ? pkt.src_ip : pkt.dst_ip;
    ThresholdEntry& e = st[{r.gid, r.sid, ip}];
    const std::uint64_t span_us = static_cast<std::uint64_t>(th.seconds) * 1000000;
    if (!e.started || pkt.ts_us >= e.window_start_us + span_us) {
        e.started = true;
        e.window_start_us = pkt.ts_us;
        e.count = 0;
    }
    ++e.count;
    switch (th.type) {
        case ThresholdType::limit: return e.count <= th.count;
        case ThresholdType::every: return e.count % th.count == 0;
        case ThresholdType::both: return e.count == th.count;
    }
    return false;
}

bool header_match(const Rule& r, const net::ParsedPacket& pkt) {
    switch (r.proto) {
        case RuleProto::ip: break;
        case RuleProto::tcp:
            if (pkt.proto != net::IpProto::tcp) return false;
            break;
        case RuleProto::udp:
            if (pkt.proto != net::IpProto::udp) return false;
            break;
        case RuleProto::icmp:
            if (pkt.proto != net::IpProto::icmp) return false;
            break;
    }
    const bool straight = r.src.matches(pkt.src_ip) && r.src_port.matches(pkt.src_port) &&
                          r.dst.matches(pkt.dst_ip) && r.dst_port.matches(pkt.dst_port);
    if (straight) return true;
    if (!r.bidirectional) return false;
    return r.src.matches(pkt.dst_ip) && r.src_port.matches(pkt.dst_port) &&
           r.dst.matches(pkt.src_ip) && r.dst_port.matches(pkt.src_port);
}

Alert make_alert(const Rule& r, int position, const net::ParsedPacket& pkt,
                 std::uint64_t version) {
    Alert a;
    a.ts_us = pkt.ts_us;
    a.gid = r.gid;
    a.sid = r.sid;
    a.msg = r.msg.empty() ? "sid:" + std::to_string(r.sid) : r.msg;
    a.action = r.action;
    a.src_ip = pkt.src_ip;
    a.src_port = pkt.src_port;
    a.dst_ip = pkt.dst_ip;
    a.dst_port = pkt.dst_port;
    a.proto = pkt.proto;
    a.dnp3_fc = pkt.dnp3.empty() ? -1 : pkt.dnp3.front().app.function_code;
    a.rule_position = position;
    a.rule_version = version;
    return a;
}

} // namespace

const char* action_name(Action a) {
    switch (a) {
        case Action::alert: return "alert";
        case Action::drop: return "drop";
        case Action::pass: return "pass";
    }
    return "alert";
}

const char* proto_name(RuleProto p) {
    switch (p) {
        case RuleProto::ip: return "ip";
        case RuleProto::tcp: return "tcp";
        case RuleProto::udp: return "udp";
        case RuleProto::icmp: return "icmp";
    }
    return "ip";
}

bool AddrExpr::matches(std::uint32_t ip) const {
    bool base;
    if (any) {
        base = true;
    } else if (!resolved) {
        base = false; // unresolved variable can never match
    } else {
        base = false;
        for (const auto& c : cidrs)
            if (c.contains(ip)) {
                base = true;
                break;
            }
    }
    return negate ? !base : base;
}

bool PortExpr::matches(std::uint16_t port) const {
    bool base = any || std::find(ports.begin(), ports.end(), port) != ports.end();
    return negate ? !base : base;
}

bool Rule::is_preproc() const {
    return metadata.find("rule-type preproc") != std::string::npos;
}

const ThresholdOpt* Rule::threshold() const {
    for (const auto& o : options)
        if (auto* th = std::get_if<ThresholdOpt>(&o)) return th;
    return nullptr;
}

Rule parse_rule(const std::string& line) {
    const auto open = line.find('(');
    const auto close = line.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw SyntaxError("rule needs a parenthesised option body");

    std::istringstream head(line.substr(0, open));
    std::vector<std::string> tok;
    std::string t;
    while (head >> t) tok.push_back(t);
    if (tok.size() != 7)
        throw SyntaxError("rule header needs action proto src sport dir dst dport");

    Rule r;
    if (tok[0] == "alert") r.action = Action::alert;
    else if (tok[0] == "drop") r.action = Action::drop;
    else if (tok[0] == "pass") r.action = Action::pass;
    else throw SyntaxError("bad action '" + tok[0] + "'");

    if (tok[1] == "ip") r.proto = RuleProto::ip;
    else if (tok[1] == "tcp") r.proto = RuleProto::tcp;
    else if (tok[1] == "udp") r.proto = RuleProto::udp;
    else if (tok[1] == "icmp") r.proto = RuleProto::icmp;
    else throw SyntaxError("bad protocol '" + tok[1] + "'");

    r.src = parse_addr(tok[2]);
    r.src_port = parse_port(tok[3]);
    if (tok[4] == "->") r.bidirectional = false;
    else if (tok[4] == "<>") r.bidirectional = true;
    else throw SyntaxError("bad direction '" + tok[4] + "'");
    r.dst = parse_addr(tok[5]);
    r.dst_port = parse_port(tok[6]);

    bool have_sid = false;
    for (const auto& opt : split_options(line.substr(open + 1, close - open - 1))) {
        const auto colon = opt.find(':');
        const std::string name = util::trim(colon == std::string::npos ? opt : opt.substr(0, colon));
        const std::string value =
            colon == std::string::npos ? "" : util::trim(opt.substr(colon + 1));
        if (name == "content") {
            r.options.emplace_back(parse_content(unquote(value, "content")));
        } else if (name == "offset") {
            auto* c = r.options.empty() ? nullptr
                                        : std::get_if<ContentOpt>(&r.options.back());
            if (!c) throw SyntaxError("offset without preceding content");
            c->offset = static_cast<std::size_t>(parse_uint(value, "offset", 65535));
        } else if (name == "depth") {
            auto* c = r.options.empty() ? nullptr
                                        : std::get_if<ContentOpt>(&r.options.back());
            if (!c) throw SyntaxError("depth without preceding content");
            auto d = parse_uint(value, "depth", 65535);
            if (d == 0) throw SyntaxError("depth must be positive");
            c->depth = static_cast<std::size_t>(d);
        } else if (name == "flow") {
            r.options.emplace_back(parse_flow(value));
        } else if (name == "threshold") {
            r.options.emplace_back(parse_threshold(value));
        } else if (name == "msg") {
            MsgOpt m{unquote(value, "msg")};
            r.msg = m.text;
            r.options.emplace_back(std::move(m));
        } else if (name == "sid") {
            SidOpt s{static_cast<std::uint32_t>(parse_uint(value, "sid", 0xFFFFFFFFull))};
            r.sid = s.value;
            have_sid = true;
            r.options.emplace_back(s);
        } else if (name == "gid") {
            GidOpt g{static_cast<std::uint32_t>(parse_uint(value, "gid", 0xFFFFFFFFull))};
            r.gid = g.value;
            r.options.emplace_back(g);
        } else if (name == "metadata") {
            MetadataOpt m{value};
            r.metadata = m.text;
            r.options.emplace_back(std::move(m));
        } else {
            throw UnknownOption("unknown option '" + name + "'");
        }
    }
    if (!have_sid) throw MissingSid("rule has no sid");
    return r;
}

std::string render_rule(const Rule& r) {
    std::string s = action_name(r.action);
    s += ' ';
    s += proto_name(r.proto);
    s += ' ';
    s += render_addr(r.src);
    s += ' ';
    s += render_port(r.src_port);
    s += r.bidirectional ? " <> " : " -> ";
    s += render_addr(r.dst);
    s += ' ';
    s += render_port(r.dst_port);
    s += " (";
    for (const auto& o : r.options) {
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, ContentOpt>) {
                    s += "content:" + render_content_value(v);
                    if (v.offset != 0) s += "; offset:" + std::to_string(v.offset);
                    if (v.depth) s += "; depth:" + std::to_string(*v.depth);
                } else if constexpr (std::is_same_v<T, FlowOpt>) {
                    s += render_flow(v);
                } else if constexpr (std::is_same_v<T, ThresholdOpt>) {
                    s += render_threshold(v);
                } else if constexpr (std::is_same_v<T, MsgOpt>) {
                    s += "msg:\"" + v.text + "\"";
                } else if constexpr (std::is_same_v<T, SidOpt>) {
                    s += "sid:" + std::to_string(v.value);
                } else if constexpr (std::is_same_v<T, GidOpt>) {
                    s += "gid:" + std::to_string(v.value);
                } else if constexpr (std::is_same_v<T, MetadataOpt>) {
                    s += "metadata:" + v.text;
                }
            },
            o);
        s += "; ";
    }
    if (!r.options.empty()) s.pop_back(); // drop the trailing space, keep ";"
    s += ')';
    return s;
}

std::string semantic_key(const Rule& r) {
    Rule stripped = r;
    stripped.msg.clear();
    stripped.sid = 0;
    std::erase_if(stripped.options, [](const RuleOption& o) {
        return std::holds_alternative<MsgOpt>(o) || std::holds_alternative<SidOpt>(o);
    });
    return render_rule(stripped);
}

RuleSet compile_ruleset(const std::string& text, const VarTable& vars,
                        std::uint64_t version) {
    RuleSet rs;
    rs.version = version;
    rs.variables = vars;
    rs.source_text = text;

    std::vector<std::pair<int, std::string>> errors;
    std::map<std::pair<std::uint32_t, std::uint32_t>, int> seen_sids;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = util::trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        Rule r;
        try {
            r = parse_rule(stripped);
        } catch (const RuleError& e) {
            errors.emplace_back(lineno, e.what());
            continue;
        }
        for (AddrExpr* side : {&r.src, &r.dst}) {
            if (side->var.empty()) continue;
            auto it = vars.find(side->var);
            if (it == vars.end()) {
                errors.emplace_back(lineno, "unresolved variable $" + side->var);
            } else {
                side->cidrs = it->second;
                side->resolved = true;
            }
        }
        auto [it, fresh] = seen_sids.try_emplace({r.gid, r.sid}, lineno);
        if (!fresh) {
            errors.emplace_back(lineno, "duplicate gid:sid " + std::to_string(r.gid) + ":" +
                                            std::to_string(r.sid) + " (first at line " +
                                            std::to_string(it->second) + ")");
            continue;
        }
        rs.rules.push_back(std::move(r));
    }

    if (!errors.empty()) {
        std::string summary = std::to_string(errors.size()) + " rule error(s):";
        for (const auto& [ln, what] : errors)
            summary += "\n  line " + std::to_string(ln) + ": " + what;
        throw CompileError(std::move(summary), std::move(errors));
    }

    for (const auto& r : rs.rules)
        if (r.is_preproc()) rs.preproc_bindings.insert({r.gid, r.sid});
    return rs;
}

EvalResult evaluate_packet(const RuleSet& rs, const net::ParsedPacket& pkt,
                           const std::optional<flow::FlowVerdict>& verdict,
                           std::span<const PreprocEvent> events,
                           ThresholdState& thresholds, const EvalConfig& cfg) {
    EvalResult res;
    for (std::size_t i = 0; i < rs.rules.size(); ++i) {
        const Rule& r = rs.rules[i];
        if (!header_match(r, pkt)) continue;

        // Every matchable option is evaluated and billed; the rule matches
        // only if all of them pass. The threshold counter is touched last and
        // only once the rest passed, so failing rules never consume budget.
        bool all_pass = true;
        const ThresholdOpt* th = nullptr;
        if (r.is_preproc()) {
            ++res.options_evaluated;
            bool bound = false;
            for (const auto& e : events)
                if (e.gid == r.gid && e.sid == r.sid) {
                    bound = true;
                    break;
                }
            all_pass = all_pass && bound;
        }
        for (const auto& o : r.options) {
            if (const auto* c = std::get_if<ContentOpt>(&o)) {
                ++res.options_evaluated;
                all_pass = content_match(*c, pkt.payload) && all_pass;
            } else if (const auto* f = std::get_if<FlowOpt>(&o)) {
                ++res.options_evaluated;
                all_pass = flow_match(*f, verdict) && all_pass;
            } else if (const auto* t = std::get_if<ThresholdOpt>(&o)) {
                th = t;
            }
        }
        if (all_pass && th) {
            ++res.options_evaluated;
            all_pass = threshold_fire(thresholds, r, *th, pkt);
        }
        if (!all_pass) continue;

        if (r.action == Action::pass) break;
        res.alerts.push_back(make_alert(r, static_cast<int>(i), pkt, rs.version));
        if (r.action == Action::drop) res.drop = true;
        if (!cfg.evaluate_all) break;
    }

    for (const auto& e : events) {
        if (rs.binds(e.gid, e.sid)) continue;
        Alert a;
        a.ts_us = pkt.ts_us;
        a.gid = e.gid;
        a.sid = e.sid;
        a.msg = e.msg.empty() ? "sid:" + std::to_string(e.sid) : e.msg;
        a.src_ip = pkt.src_ip;
        a.src_port = pkt.src_port;
        a.dst_ip = pkt.dst_ip;
        a.dst_port = pkt.dst_port;
        a.proto = pkt.proto;
        a.dnp3_fc = pkt.dnp3.empty() ? -1 : pkt.dnp3.front().app.function_code;
        a.rule_position = -1;
        a.rule_version = rs.version;
        res.alerts.push_back(std::move(a));
    }
    return res;
}

} // namespace dnp3ids::rules
