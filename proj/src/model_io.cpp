#include "kwb/model_io.hpp"

#include <fstream>
#include <sstream>

namespace kwb {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw ParseError("model file: " + msg, 0); }

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
    return j.at(key);
}

std::string str(const Json& j, const std::string& what) {
    if (!j.is_string()) bad(what + " must be a string");
    return j.get<std::string>();
}

int elem(const KripkeModel& m, int w, const Json& j) {
    std::string name = str(j, "element name");
    auto a = m.find_element(w, name);
    if (!a) bad("unknown element '" + name + "' at world '" + m.worlds[w] + "'");
    return *a;
}

int world(const KripkeModel& m, const Json& j) {
    std::string name = str(j, "world name");
    auto w = m.find_world(name);
    if (!w) bad("unknown world '" + name + "'");
    return *w;
}

// "w>v" keys; world names may themselves contain '>', so every split point is
// tried and exactly one must name two worlds.
std::pair<int, int> split_edge(const KripkeModel& m, const std::string& key) {
    std::vector<std::pair<int, int>> hits;
    for (std::size_t i = key.find('>'); i != std::string::npos; i = key.find('>', i + 1)) {
        auto a = m.find_world(key.substr(0, i)), b = m.find_world(key.substr(i + 1));
        if (a && b) hits.push_back({*a, *b});
    }
    if (hits.size() != 1) bad("cannot resolve hom key '" + key + "'");
    return hits[0];
}

void read_hom(KripkeModel& m, int w, int v, const Json& map) {
    if (!map.is_object()) bad("hom maps must be objects");
    auto& h = m.hom[w][v];
    h.assign(m.domain_size(w), -1);
    for (const auto& [a, b] : map.items()) {
        auto ai = m.find_element(w, a);
        if (!ai) bad("unknown element '" + a + "' at world '" + m.worlds[w] + "'");
        h[*ai] = elem(m, v, b);
    }
}

bool ambiguous_keys(const KripkeModel& m) {
    for (const auto& w : m.worlds)
        if (w.find('>') != std::string::npos) return true;
    return false;
}

}  // namespace

Signature signature_from_json(const Json& sig) {
    if (!sig.is_object()) bad("signature must be an object");
    Signature out;
    if (sig.contains("preds")) {
        if (!sig["preds"].is_object()) bad("signature.preds must be an object");
        for (const auto& [p, k] : sig["preds"].items()) {
            if (!k.is_number_integer()) bad("arity of " + p + " must be an integer");
            out.preds[p] = k.get<int>();
        }
    }
    if (sig.contains("consts"))
        for (const auto& c : sig["consts"]) out.consts.insert(str(c, "constant"));
    if (sig.contains("equality")) {
        if (!sig["equality"].is_boolean()) bad("signature.equality must be a boolean");
        out.equality = sig["equality"].get<bool>();
    }
    return out;
}

KripkeModel model_from_json(const Json& j) {
    if (!j.is_object()) bad("top level must be an object");
    KripkeModel m;
    m.sig = signature_from_json(field(j, "signature"));
    for (const auto& w : field(j, "worlds")) m.add_world(str(w, "world name"));
    if (j.contains("order"))
        for (const auto& e : j["order"]) {
            if (!e.is_array() || e.size() != 2) bad("order entries must be pairs");
            m.add_edge(world(m, e[0]), world(m, e[1]));
        }
    m.close_order();
    if (j.contains("domains")) {
        if (!j["domains"].is_object()) bad("domains must be an object");
        for (const auto& [w, els] : j["domains"].items()) {
            int wi = world(m, w);
            for (const auto& a : els) m.add_element(wi, str(a, "element name"));
        }
    }
    if (j.contains("interp")) {
        for (const auto& [w, block] : j["interp"].items()) {
            int wi = world(m, w);
            for (const auto& [sym, val] : block.items()) {
                if (val.is_string()) {
                    m.interp[wi].consts[sym] = elem(m, wi, val);
                    continue;
                }
                if (!val.is_array()) bad("extension of " + sym + " must be a list");
                auto& ext = m.interp[wi].preds[sym];
                for (const auto& t : val) {
                    Tuple tup;
                    if (t.is_string()) {
                        tup.push_back(elem(m, wi, t));
                    } else {
                        if (!t.is_array()) bad("tuples must be lists of element names");
                        for (const auto& a : t) tup.push_back(elem(m, wi, a));
                    }
                    ext.insert(tup);
                }
            }
        }
    }
    if (j.contains("homs")) {
        const Json& hs = j["homs"];
        if (hs.is_object()) {
            for (const auto& [key, map] : hs.items()) {
                auto [w, v] = split_edge(m, key);
                read_hom(m, w, v, map);
            }
        } else if (hs.is_array()) {
            for (const auto& rec : hs) read_hom(m, world(m, field(rec, "from")), world(m, field(rec, "to")), field(rec, "map"));
        } else {
            bad("homs must be an object or a list");
        }
    }
    m.complete_homs();
    return m;
}

Json model_to_json(const KripkeModel& m) {
    Json j;
    Json preds = Json::object();
    for (const auto& [p, k] : m.sig.preds) preds[p] = k;
    Json consts = Json::array();
    for (const auto& c : m.sig.consts) consts.push_back(c);
    j["signature"] = {{"preds", preds}, {"consts", consts}, {"equality", m.sig.equality}};
    j["worlds"] = m.worlds;
    Json order = Json::array();
    for (int w = 0; w < m.size(); ++w)
        for (int v = 0; v < m.size(); ++v)
            if (m.lt(w, v)) order.push_back({m.worlds[w], m.worlds[v]});
    j["order"] = order;
    Json doms = Json::object();
    for (int w = 0; w < m.size(); ++w) doms[m.worlds[w]] = m.domains[w];
    j["domains"] = doms;
    Json interp = Json::object();
    for (int w = 0; w < m.size(); ++w) {
        Json block = Json::object();
        for (const auto& [p, ext] : m.interp[w].preds) {
            Json tuples = Json::array();
            for (const auto& t : ext) {
                Json tup = Json::array();
                for (int a : t) tup.push_back(m.domains[w][a]);
                tuples.push_back(tup);
            }
            block[p] = tuples;
        }
        for (const auto& [c, a] : m.interp[w].consts) block[c] = m.domains[w][a];
        interp[m.worlds[w]] = block;
    }
    j["interp"] = interp;
    bool as_list = ambiguous_keys(m);
    Json homs = as_list ? Json::array() : Json::object();
    for (int w = 0; w < m.size(); ++w)
        for (int v = 0; v < m.size(); ++v) {
            if (!m.lt(w, v)) continue;
            Json map = Json::object();
            for (int a = 0; a < m.domain_size(w) && a < static_cast<int>(m.hom[w][v].size()); ++a)
                if (m.hom[w][v][a] >= 0) map[m.domains[w][a]] = m.domains[v][m.hom[w][v][a]];
            if (as_list)
                homs.push_back({{"from", m.worlds[w]}, {"to", m.worlds[v]}, {"map", map}});
            else
                homs[m.worlds[w] + ">" + m.worlds[v]] = map;
        }
    j["homs"] = homs;
    return j;
}

KripkeModel parse_model(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("model file: ") + e.what(), e.byte);
    }
    try {
        return model_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("model file: ") + e.what(), 0);
    }
}

std::string dump_model(const KripkeModel& m) { return model_to_json(m).dump(2); }

KripkeModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read " + path, 0);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

void save_model(const KripkeModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << dump_model(m) << "\n";
}

}  // namespace kwb
