#include <algorithm>
#include <fstream>
#include <sstream>

#include <rapidjson/document.h>
#include <rapidjson/error/en.h>
#include <rapidjson/reader.h>
#include <rapidjson/schema.h>
#include <rapidjson/stringbuffer.h>

#include "kmech/cli.hpp"
#include "run_config_schema.hpp"

namespace kmech::cli {

namespace {

struct Position {
    int line = 1;
    int column = 1;
};

Position position_of(const std::string& text, std::size_t offset) {
    Position p;
    offset = std::min(offset, text.size());
    for (std::size_t i = 0; i < offset; ++i) {
        if (text[i] == '\n') {
            ++p.line;
            p.column = 1;
        } else {
            ++p.column;
        }
    }
    return p;
}

std::string escape_token(const std::string& key) {
    std::string out;
    for (char c : key) {
        if (c == '~') out += "~0";
        else if (c == '/') out += "~1";
        else out += c;
    }
    return out;
}

std::string describe(const std::string& pointer) { return pointer.empty() ? "top level" : pointer; }

std::string join_values(const rapidjson::Value& arr) {
    std::string out;
    for (const auto& v : arr.GetArray()) {
        if (!out.empty()) out += ", ";
        out += v.IsString() ? v.GetString() : "?";
    }
    return out;
}

// Forwards SAX events to the schema validator while tracking where in the
// text each JSON pointer starts.
class Tracker {
public:
    Tracker(rapidjson::SchemaValidator& validator, rapidjson::StringStream& stream, const std::string& text)
        : v_(validator), stream_(stream), text_(text) {}

    bool Null() { return scalar([&] { return v_.Null(); }); }
    bool Bool(bool b) { return scalar([&] { return v_.Bool(b); }); }
    bool Int(int i) { return scalar([&] { return v_.Int(i); }); }
    bool Uint(unsigned u) { return scalar([&] { return v_.Uint(u); }); }
    bool Int64(int64_t i) { return scalar([&] { return v_.Int64(i); }); }
    bool Uint64(uint64_t u) { return scalar([&] { return v_.Uint64(u); }); }
    bool Double(double d) { return scalar([&] { return v_.Double(d); }); }
    bool RawNumber(const char* s, rapidjson::SizeType n, bool copy) {
        return scalar([&] { return v_.RawNumber(s, n, copy); });
    }
    bool String(const char* s, rapidjson::SizeType n, bool copy) {
        return scalar([&] { return v_.String(s, n, copy); });
    }

    bool StartObject() { return open(true, [&] { return v_.StartObject(); }); }
    bool Key(const char* s, rapidjson::SizeType n, bool copy) {
        Frame& f = stack_.back();
        f.key.assign(s, n);
        f.keys.push_back(f.key);
        note(f.pointer + "/" + escape_token(f.key));
        return v_.Key(s, n, copy);
    }
    bool EndObject(rapidjson::SizeType n) { return close([&] { return v_.EndObject(n); }); }
    bool StartArray() { return open(false, [&] { return v_.StartArray(); }); }
    bool EndArray(rapidjson::SizeType n) { return close([&] { return v_.EndArray(n); }); }

    const std::map<std::string, int>& lines() const { return lines_; }
    std::string last_key() const { return stack_.empty() ? std::string() : stack_.back().key; }
    std::string current_object() const { return stack_.empty() ? std::string() : stack_.back().pointer; }
    const std::vector<std::string>& current_keys() const {
        static const std::vector<std::string> none;
        return stack_.empty() ? none : stack_.back().keys;
    }

private:
    struct Frame {
        bool object = false;
        std::string pointer;
        std::string key;
        std::size_t index = 0;
        std::vector<std::string> keys;
    };

    std::string value_pointer() const {
        if (stack_.empty()) return "";
        const Frame& f = stack_.back();
        return f.object ? f.pointer + "/" + escape_token(f.key) : f.pointer + "/" + std::to_string(f.index);
    }

    void note(const std::string& pointer) {
        if (!lines_.count(pointer)) lines_[pointer] = position_of(text_, stream_.Tell()).line;
    }

    void element_start() {
        if (stack_.empty()) note("");
        else if (!stack_.back().object) note(value_pointer());
    }

    void element_end() {
        if (!stack_.empty() && !stack_.back().object) ++stack_.back().index;
    }

    template <class F>
    bool scalar(F&& forward) {
        element_start();
        if (!forward()) return false;
        element_end();
        return true;
    }

    template <class F>
    bool open(bool object, F&& forward) {
        element_start();
        Frame f;
        f.object = object;
        f.pointer = value_pointer();
        stack_.push_back(std::move(f));
        return forward();
    }

    template <class F>
    bool close(F&& forward) {
        if (!forward()) return false;
        stack_.pop_back();
        element_end();
        return true;
    }

    rapidjson::SchemaValidator& v_;
    rapidjson::StringStream& stream_;
    const std::string& text_;
    std::vector<Frame> stack_;
    std::map<std::string, int> lines_;
};

const rapidjson::SchemaDocument& schema_document() {
    static const rapidjson::SchemaDocument doc = [] {
        rapidjson::Document d;
        d.Parse(run_config_schema().c_str());
        if (d.HasParseError()) throw Error("embedded run-config schema does not parse");
        return rapidjson::SchemaDocument(d);
    }();
    return doc;
}

const rapidjson::Document& schema_json() {
    static const rapidjson::Document doc = [] {
        rapidjson::Document d;
        d.Parse(run_config_schema().c_str());
        return d;
    }();
    return doc;
}

std::string schema_message(const rapidjson::SchemaValidator& v, const Tracker& t) {
    const std::string keyword = v.GetInvalidSchemaKeyword();
    rapidjson::StringBuffer buf;
    v.GetInvalidDocumentPointer().Stringify(buf);
    const std::string where = buf.GetString();
    const rapidjson::Value* node = v.GetInvalidSchemaPointer().Get(schema_json());

    if (keyword == "additionalProperties") {
        return "unknown field \"" + t.last_key() + "\" in " + describe(t.current_object());
    }
    if (keyword == "required" && node && node->HasMember("required")) {
        std::string missing;
        const auto& have = t.current_keys();
        for (const auto& r : (*node)["required"].GetArray()) {
            if (std::find(have.begin(), have.end(), r.GetString()) == have.end()) {
                if (!missing.empty()) missing += ", ";
                missing += std::string("\"") + r.GetString() + "\"";
            }
        }
        return "missing required field " + missing + " in " + describe(t.current_object());
    }
    if (keyword == "enum" && node && node->HasMember("enum")) {
        return describe(where) + " must be one of: " + join_values((*node)["enum"]);
    }
    if (keyword == "type" && node && node->HasMember("type")) {
        const auto& ty = (*node)["type"];
        return describe(where) + " must be of type " + (ty.IsString() ? ty.GetString() : join_values(ty));
    }
    if ((keyword == "minimum" || keyword == "maximum") && node) {
        const bool excl = node->HasMember("exclusiveMinimum") || node->HasMember("exclusiveMaximum");
        const char* bound = keyword == "minimum" ? "minimum" : "maximum";
        std::ostringstream os;
        os << describe(where) << " is out of range (" << bound << " " << (*node)[bound].GetDouble()
           << (excl ? ", exclusive)" : ")");
        return os.str();
    }
    if (keyword == "minItems" || keyword == "maxItems") return describe(where) + " has the wrong number of items";
    return describe(where) + " violates schema keyword \"" + keyword + "\"";
}

}  // namespace

const std::string& run_config_schema() {
    static const std::string text = kRunConfigSchema;
    return text;
}

std::string ParsedConfig::where(const std::string& pointer) const {
    std::string p = pointer;
    while (true) {
        auto it = lines.find(p);
        if (it != lines.end()) return source + ":" + std::to_string(it->second);
        if (p.empty()) return source;
        p = p.substr(0, p.rfind('/'));
    }
}

ParsedConfig parse_config_text(const std::string& text, const std::string& source) {
    rapidjson::SchemaValidator validator(schema_document());
    rapidjson::StringStream stream(text.c_str());
    Tracker tracker(validator, stream, text);
    rapidjson::Reader reader;
    const rapidjson::ParseResult ok = reader.Parse<rapidjson::kParseFullPrecisionFlag>(stream, tracker);
    if (!ok) {
        const Position p = position_of(text, ok.Offset());
        const std::string at = source + ":" + std::to_string(p.line) + ":" + std::to_string(p.column) + ": ";
        if (ok.Code() == rapidjson::kParseErrorTermination && !validator.IsValid()) {
            throw ConfigError(at + schema_message(validator, tracker));
        }
        throw ConfigError(at + "JSON syntax error: " + rapidjson::GetParseError_En(ok.Code()));
    }
    ParsedConfig out;
    out.doc = nlohmann::json::parse(text);
    out.lines = tracker.lines();
    out.source = source;
    return out;
}

ParsedConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string() + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

RunConfig run_config_from(const ParsedConfig& parsed) {
    const auto& j = parsed.doc;
    RunConfig c;
    auto fail = [&](const std::string& pointer, const std::string& msg) -> ConfigError {
        return ConfigError(parsed.where(pointer) + ": " + msg);
    };
    try {
        c.system = system_from_json(j.at("system"));
        validate(c.system);
    } catch (const Error& e) {
        throw fail("/system", e.what());
    }
    c.chart = j.contains("chart") ? chart_from_string(j.at("chart").get<std::string>()) : native_chart(c.system.family);

    if (j.contains("initial_state")) {
        const auto coords = j.at("initial_state").at("coords").get<std::vector<double>>();
        const auto momenta = j.at("initial_state").at("momenta").get<std::vector<double>>();
        const std::size_t d = dimension(c.chart);
        if (coords.size() != d || momenta.size() != d) {
            throw fail("/initial_state", "the " + std::string(to_string(c.chart)) + " chart needs " + std::to_string(d) +
                                             " coords and " + std::to_string(d) + " momenta");
        }
        PhaseVector v;
        v.dim = d;
        for (std::size_t i = 0; i < d; ++i) {
            v[i] = coords[i];
            v[d + i] = momenta[i];
        }
        try {
            State s = from_canonical(c.chart, c.system.kappa, v);
            validate(s);
            if (!std::isfinite(hamiltonian(c.system, s))) throw DomainError("H is not finite at the initial state");
            c.initial_state = s;
            c.initial_vector = v;
        } catch (const Error& e) {
            throw fail("/initial_state", e.what());
        }
    }
    if (j.contains("t_end")) {
        c.t_end = j.at("t_end").get<double>();
        c.t_end_set = true;
    }
    if (j.contains("integrator")) {
        try {
            c.integrator = integrator_from_json(j.at("integrator"));
        } catch (const Error& e) {
            throw fail("/integrator", e.what());
        }
    }
    if (j.contains("integrals")) {
        const auto& arr = j.at("integrals");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            try {
                IntegralSpec in{integral_from_string(arr[i].get<std::string>()), c.system, 1};
                check_compatible(in);
                c.integrals.push_back(in);
            } catch (const Error& e) {
                throw fail("/integrals/" + std::to_string(i), e.what());
            }
        }
    }
    c.drift_threshold = j.value("drift_threshold", c.drift_threshold);
    if (j.contains("outputs")) {
        const auto& o = j.at("outputs");
        if (o.contains("formats")) c.formats = o.at("formats").get<std::vector<std::string>>();
        c.plot_data = o.value("plot_data", false);
    }
    c.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("closure")) {
        const auto& cl = j.at("closure");
        if (cl.contains("gammas")) {
            for (const auto& g : cl.at("gammas")) c.closure_gammas.push_back(g.is_string() ? g.get<std::string>() : g.dump());
        }
        c.closure_tol = cl.value("tol", c.closure_tol);
    }
    if (j.contains("sweep")) {
        const auto& sw = j.at("sweep");
        if (sw.contains("kappas")) c.sweep_kappas = sw.at("kappas").get<std::vector<double>>();
        c.sweep_grid = sw.value("grid", c.sweep_grid);
    }
    for (std::size_t i = 0; i < c.closure_gammas.size(); ++i) {
        try {
            (void)parse_gamma(c.closure_gammas[i]);
        } catch (const Error& e) {
            throw fail("/closure/gammas/" + std::to_string(i), e.what());
        }
    }
    return c;
}

State initial_state_at(const RunConfig& config, double kappa) {
    if (!config.initial_vector) throw ConfigError("the config has no initial_state");
    State s = from_canonical(config.chart, kappa, *config.initial_vector);
    validate(s);
    return s;
}

}  // namespace kmech::cli
