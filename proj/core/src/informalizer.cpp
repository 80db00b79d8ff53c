#include "geosynth/informalizer.hpp"

#include "geosynth/assets.hpp"
#include "geosynth/elements.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <fstream>
#include <regex>

namespace geosynth {

namespace {

    /// Digits outside `{slot}` placeholders.
    bool has_digit(const std::string& s)
    {
        static const std::regex slot(R"(\{[a-z]+[0-9]*\})");
        const std::string bare = std::regex_replace(s, slot, "");
        return std::any_of(bare.begin(), bare.end(), [](unsigned char c) { return std::isdigit(c); });
    }

    /// Slot names in `text`, e.g. {"a0", "p1"}.
    std::vector<std::string> slots(const std::string& text)
    {
        static const std::regex re(R"(\{([a-z]+[0-9]*)\})");
        std::vector<std::string> out;
        for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
            out.push_back((*it)[1]);
        }
        return out;
    }

} // namespace

const TemplateBank& TemplateBank::builtin()
{
    static const TemplateBank bank = from_json(nlohmann::json::parse(asset("templates.json")));
    return bank;
}

TemplateBank TemplateBank::from_json(const nlohmann::json& j)
{
    TemplateBank bank;
    bank.figure_sentence_ = j.at("figure_sentence").get<std::string>();
    for (const auto& [ctor, list] : j.at("constructors").items()) {
        auto& dst = bank.entries_[ctor];
        for (const auto& t : list) {
            Template tpl { t.at("id").get<std::string>(), t.at("full").get<std::string>(), {} };
            tpl.lite = t.contains("lite") ? t.at("lite").get<std::string>() : tpl.full;
            dst.push_back(std::move(tpl));
        }
    }
    return bank;
}

TemplateBank TemplateBank::from_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open template bank " + path.string());
    }
    return from_json(nlohmann::json::parse(in));
}

const std::vector<TemplateBank::Template>& TemplateBank::templates(const std::string& constructor) const
{
    auto it = entries_.find(constructor);
    if (it == entries_.end() || it->second.empty()) {
        throw MissingTemplate(constructor);
    }
    return it->second;
}

std::vector<std::string> TemplateBank::problems() const
{
    std::vector<std::string> out;
    if (has_digit(figure_sentence_)) {
        out.push_back("figure sentence contains a digit");
    }
    for (const auto& e : ElementCatalog::instance().entries()) {
        auto it = entries_.find(e.name);
        if (it == entries_.end() || it->second.size() < 2) {
            out.push_back(e.name + ": fewer than two templates");
            continue;
        }
        const std::size_t max_labels = e.variadic() ? static_cast<std::size_t>(e.max_vertices) : [&] {
            std::size_t n = 0;
            for (auto s : e.slots) {
                n += (s == Slot::Line || s == Slot::LineFromNew || s == Slot::LineNewNew) ? 2 : 1;
            }
            return n;
        }();
        for (const auto& t : it->second) {
            for (const auto* text : { &t.full, &t.lite }) {
                for (const auto& s : slots(*text)) {
                    const bool ok = s == "all" || s == "polygon"
                        || (s[0] == 'a' && s.size() > 1 && std::stoul(s.substr(1)) < max_labels)
                        || (s[0] == 'p' && s.size() > 1 && std::stoul(s.substr(1)) < e.params.size());
                    if (!ok) {
                        out.push_back(t.id + ": unknown slot {" + s + "}");
                    }
                }
            }
            for (std::size_t i = 0; i < e.params.size(); ++i) {
                if (t.full.find("{p" + std::to_string(i) + "}") == std::string::npos) {
                    out.push_back(t.id + ": full text omits {p" + std::to_string(i) + "}");
                }
            }
            if (has_digit(t.lite)) {
                out.push_back(t.id + ": lite text contains a number");
            }
        }
    }
    return out;
}

std::string TemplateBank::instantiate(const Statement& st, const Template& t, bool lite) const
{
    const std::string& text = lite ? t.lite : t.full;
    const auto labels = st.labels();
    const CatalogEntry* e = st.entry();
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
        const std::size_t open = text.find('{', i);
        if (open == std::string::npos) {
            out.append(text, i);
            break;
        }
        out.append(text, i, open - i);
        const std::size_t close = text.find('}', open);
        if (close == std::string::npos) {
            throw std::runtime_error(t.id + ": unterminated slot");
        }
        const std::string slot = text.substr(open + 1, close - open - 1);
        if (slot == "all") {
            for (const auto& l : labels) {
                out += l.name;
            }
        } else if (slot == "polygon") {
            out += shape_noun(ShapeRef { st.constructor, labels });
        } else if (slot.size() > 1 && slot[0] == 'a') {
            out += labels.at(std::stoul(slot.substr(1))).name;
        } else if (slot.size() > 1 && slot[0] == 'p') {
            const std::size_t k = std::stoul(slot.substr(1));
            out += st.params.at(k).to_string();
            if (e && k < e->params.size() && e->params[k] == ParamKind::Angle) {
                out += "°";
            }
        } else {
            throw std::runtime_error(t.id + ": unknown slot {" + slot + "}");
        }
        i = close + 1;
    }
    return out;
}

std::size_t template_choice(const Rng& rng, int index, std::size_t count)
{
    return static_cast<std::size_t>(rng.split(static_cast<std::uint64_t>(index)).below(count));
}

namespace {

    std::string compose(const DslSequence& seq, const Scene& scene, const Rng& rng, const TemplateBank& bank, bool lite)
    {
        std::string out;
        for (std::size_t i = 0; i < seq.statements.size(); ++i) {
            const Statement& st = seq.statements[i];
            const int index = static_cast<int>(i) + 1;
            const auto& list = bank.templates(st.constructor);
            const auto& t = list[template_choice(rng, index, list.size())];
            bool use_lite = false;
            if (lite) {
                use_lite = std::any_of(scene.annotations.begin(), scene.annotations.end(),
                    [&](const AnnotationItem& a) { return a.statement == index && a.valued(); });
            }
            if (!out.empty()) {
                out += ' ';
            }
            out += bank.instantiate(st, t, use_lite);
        }
        if (lite) {
            out += (out.empty() ? "" : " ") + bank.figure_sentence();
        }
        return out;
    }

} // namespace

std::string to_text_full(const DslSequence& seq, const Scene& scene, const Rng& rng, const TemplateBank& bank)
{
    return compose(seq, scene, rng, bank, false);
}

std::string to_text_lite(const DslSequence& seq, const Scene& scene, const Rng& rng, const TemplateBank& bank)
{
    return compose(seq, scene, rng, bank, true);
}

std::vector<double> numerals(std::string_view text)
{
    std::vector<double> out;
    auto digit = [&](std::size_t k) { return k < text.size() && std::isdigit(static_cast<unsigned char>(text[k])); };
    std::size_t i = 0;
    while (i < text.size()) {
        if (!digit(i)) {
            ++i;
            continue;
        }
        const bool glued = i > 0 && std::isalpha(static_cast<unsigned char>(text[i - 1]));
        std::size_t j = i;
        while (digit(j)) {
            ++j;
        }
        if (j < text.size() && text[j] == '.' && digit(j + 1)) {
            ++j;
            while (digit(j)) {
                ++j;
            }
        }
        double value = std::stod(std::string(text.substr(i, j - i)));
        if (j < text.size() && text[j] == '/' && digit(j + 1)) {
            std::size_t k = j + 1;
            while (digit(k)) {
                ++k;
            }
            const double den = std::stod(std::string(text.substr(j + 1, k - j - 1)));
            if (den != 0) {
                value /= den;
                j = k;
            }
        }
        if (!glued) {
            out.push_back(value);
        }
        i = j;
    }
    return out;
}

} // namespace geosynth
