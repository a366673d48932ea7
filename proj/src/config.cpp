#include "aerofuse/config.hpp"

#include "aerofuse/ini.hpp"
#include "aerofuse/text.hpp"

#include <filesystem>
#include <set>

namespace aerofuse {

namespace {

const std::set<std::string> kSections = {"general", "grid",     "mode",      "fusion",
                                         "recovery", "evaluation", "inputs", "simulate",
                                         "seg_noise", "det_noise"};

void read_noise(ini::SectionReader& r, synth::SyntheticBackendConfig& c) {
    r.read("miss_rate", c.miss_rate);
    r.read("weak_rate", c.weak_rate);
    r.read("false_positive_rate", c.false_positive_rate);
    r.read("weak_false_positive_rate", c.weak_false_positive_rate);
    r.read("fp_near_object_fraction", c.fp_near_object_fraction);
    r.read("label_confusion_rate", c.label_confusion_rate);
    r.read("localization_jitter", c.localization_jitter);
    r.read("disjoint_false_positives", c.disjoint_false_positives);
    r.read("confidence_min", c.confidence_min);
    r.read("confidence_max", c.confidence_max);
    r.read("weak_confidence_min", c.weak_confidence_min);
    r.read("weak_confidence_max", c.weak_confidence_max);
}

synth::SyntheticBackendConfig noiseless() { return synth::SyntheticBackendConfig{}; }

std::string fmt(double v) { return text::format_double(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

void write_noise(std::string& out, const synth::SyntheticBackendConfig& c) {
    out += "miss_rate = " + fmt(c.miss_rate) + "\n";
    out += "weak_rate = " + fmt(c.weak_rate) + "\n";
    out += "; per km2\n";
    out += "false_positive_rate = " + fmt(c.false_positive_rate) + "\n";
    out += "weak_false_positive_rate = " + fmt(c.weak_false_positive_rate) + "\n";
    out += "fp_near_object_fraction = " + fmt(c.fp_near_object_fraction) + "\n";
    out += "label_confusion_rate = " + fmt(c.label_confusion_rate) + "\n";
    out += "localization_jitter = " + fmt(c.localization_jitter) + "\n";
    out += "disjoint_false_positives = " + fmt(c.disjoint_false_positives) + "\n";
    out += "confidence_min = " + fmt(c.confidence_min) + "\n";
    out += "confidence_max = " + fmt(c.confidence_max) + "\n";
    out += "weak_confidence_min = " + fmt(c.weak_confidence_min) + "\n";
    out += "weak_confidence_max = " + fmt(c.weak_confidence_max) + "\n";
}

}  // namespace

void Config::validate() const {
    fusion.validate();
    if (!(match_threshold > 0.0 && match_threshold <= 1.0)) {
        throw std::invalid_argument("evaluation threshold must be in (0, 1]");
    }
    if (report_level != 2 && report_level != 3) throw std::invalid_argument("evaluation level must be 2 or 3");
    if (fusion.grid.tile_size <= 0 || fusion.grid.overlap < 0 ||
        fusion.grid.overlap >= fusion.grid.tile_size) {
        throw std::invalid_argument("grid requires tile_size > overlap >= 0");
    }
    if (simulate) {
        if (simulate->scenes < 1) throw std::invalid_argument("simulate scenes must be >= 1");
        if (simulate->noise != "calibrated" && simulate->noise != "noiseless") {
            throw std::invalid_argument("simulate noise must be calibrated or noiseless");
        }
        if (simulate->scene.n_aircraft < 0) throw std::invalid_argument("n_aircraft must be >= 0");
        simulate->seg.validate();
        simulate->det.validate();
    }
}

Config parse_config(std::string_view document) {
    const auto doc = ini::parse(document);
    for (const auto& [name, values] : doc.sections) {
        if (name.empty()) {
            throw ini::IniError("key '" + values.begin()->first + "' outside any section");
        }
        if (!kSections.count(name)) throw ini::IniError("unknown section [" + name + "]");
    }
    auto section = [&](const std::string& name) {
        const auto it = doc.sections.find(name);
        return ini::SectionReader(name, it == doc.sections.end()
                                            ? std::map<std::string, std::string>{}
                                            : it->second);
    };

    Config c;
    {
        auto r = section("general");
        r.read("taxonomy", c.taxonomy);
        if (auto s = r.get_string("seed")) {
            auto v = text::parse_number<std::uint64_t>(*s);
            if (!v) throw ini::IniError("[general] seed: expected a non-negative integer, got '" + *s + "'");
            c.seed = *v;
        }
        if (auto t = r.get_int("threads")) {
            if (*t < 0) throw std::invalid_argument("threads must be >= 0");
            c.fusion.threads = static_cast<unsigned>(*t);
        }
        r.finish();
    }
    {
        auto r = section("grid");
        r.read("tile_size", c.fusion.grid.tile_size);
        r.read("overlap", c.fusion.grid.overlap);
        r.finish();
    }
    {
        auto r = section("mode");
        if (auto p = r.get_string("preset")) c.fusion.mode = OperatingMode::preset(*p);
        auto& m = c.fusion.mode;
        const OperatingMode before = m;
        r.read("seg_threshold", m.seg_threshold);
        r.read("seg_min_size", m.seg_min_size);
        r.read("det_threshold", m.det_threshold);
        r.read("det_min_size", m.det_min_size);
        r.read("recovery", m.enable_recovery);
        const bool changed = m.seg_threshold != before.seg_threshold ||
                             m.seg_min_size != before.seg_min_size ||
                             m.det_threshold != before.det_threshold ||
                             m.det_min_size != before.det_min_size;
        if (changed) m.name = "custom";
        r.finish();
    }
    {
        auto r = section("fusion");
        r.read("max_iter", c.fusion.max_iter);
        r.read("window", c.fusion.window);
        r.read("nms_threshold", c.fusion.nms_threshold);
        r.finish();
    }
    {
        auto r = section("recovery");
        auto& p = c.fusion.recovery;
        r.read("size_min", p.size_min);
        r.read("size_max", p.size_max);
        r.read("max_distance", p.max_distance);
        r.read("fallback_min_area", p.fallback_min_area);
        r.read("fallback_max_area", p.fallback_max_area);
        r.finish();
    }
    {
        auto r = section("evaluation");
        if (auto s = r.get_string("criterion")) c.criterion = parse_criterion(*s);
        r.read("threshold", c.match_threshold);
        r.read("level", c.report_level);
        r.finish();
    }
    {
        auto r = section("inputs");
        r.read("manifest", c.manifest);
        r.read("seg_backend", c.seg_backend);
        r.read("det_backend", c.det_backend);
        r.finish();
    }
    if (doc.has("simulate") || doc.has("seg_noise") || doc.has("det_noise")) {
        SimulateConfig s;
        auto r = section("simulate");
        r.read("scenes", s.scenes);
        r.read("noise", s.noise);
        if (s.noise == "noiseless") {
            s.seg = noiseless();
            s.det = noiseless();
        } else if (s.noise != "calibrated") {
            throw std::invalid_argument("simulate noise must be calibrated or noiseless, got '" + s.noise + "'");
        }
        r.read("width", s.scene.width);
        r.read("height", s.scene.height);
        r.read("resolution_cm", s.scene.resolution_cm);
        r.read("n_aircraft", s.scene.n_aircraft);
        r.read("n_clusters", s.scene.n_clusters);
        r.read("cluster_spread", s.scene.cluster_spread);
        r.read("pair_fraction", s.scene.pair_fraction);
        r.read("min_length", s.scene.min_length);
        r.read("max_length", s.scene.max_length);
        r.read("write_image", s.write_image);
        r.finish();
        auto seg = section("seg_noise");
        read_noise(seg, s.seg);
        seg.finish();
        auto det = section("det_noise");
        read_noise(det, s.det);
        det.finish();
        c.simulate = s;
    }
    c.validate();
    return c;
}

Config load_config(const std::string& path) {
    Config c;
    try {
        c = parse_config(text::read_file(path));
    } catch (const std::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    const auto base = std::filesystem::path(path).parent_path();
    auto resolve = [&](std::string& p) {
        if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
    };
    resolve(c.taxonomy);
    resolve(c.manifest);
    resolve(c.seg_backend);
    resolve(c.det_backend);
    return c;
}

std::string default_config_document() {
    const Config c;
    const SimulateConfig s;
    const auto& m = c.fusion.mode;
    const auto& rp = c.fusion.recovery;
    std::string out;
    out += "; aerofuse configuration; every key is shown at its default.\n";
    out += "; Relative paths are resolved against this file's directory.\n\n";
    out += "[general]\n";
    out += "; empty means the built-in taxonomy\ntaxonomy =\n";
    out += "seed = " + std::to_string(c.seed) + "\n";
    out += "; 0 uses every hardware thread\nthreads = " + std::to_string(c.fusion.threads) + "\n\n";
    out += "[grid]\n";
    out += "tile_size = " + std::to_string(c.fusion.grid.tile_size) + "\n";
    out += "overlap = " + std::to_string(c.fusion.grid.overlap) + "\n\n";
    out += "[mode]\n";
    out += "; balanced, recall or precision; the keys below override the preset\n";
    out += "preset = " + m.name + "\n";
    out += "seg_threshold = " + fmt(m.seg_threshold) + "\n";
    out += "seg_min_size = " + fmt(m.seg_min_size) + "\n";
    out += "det_threshold = " + fmt(m.det_threshold) + "\n";
    out += "det_min_size = " + fmt(m.det_min_size) + "\n";
    out += "recovery = " + fmt(m.enable_recovery) + "\n\n";
    out += "[fusion]\n";
    out += "max_iter = " + std::to_string(c.fusion.max_iter) + "\n";
    out += "window = " + std::to_string(c.fusion.window) + "\n";
    out += "nms_threshold = " + fmt(c.fusion.nms_threshold) + "\n\n";
    out += "[recovery]\n";
    out += "size_min = " + fmt(rp.size_min) + "\n";
    out += "size_max = " + fmt(rp.size_max) + "\n";
    out += "max_distance = " + fmt(rp.max_distance) + "\n";
    out += "fallback_min_area = " + fmt(rp.fallback_min_area) + "\n";
    out += "fallback_max_area = " + fmt(rp.fallback_max_area) + "\n\n";
    out += "[evaluation]\n";
    out += "; over-target or iou\ncriterion = " + criterion_name(c.criterion) + "\n";
    out += "threshold = " + fmt(c.match_threshold) + "\n";
    out += "level = " + std::to_string(c.report_level) + "\n\n";
    out += "[inputs]\n";
    out += "; used by run and end-to-end when there is no [simulate] section\n";
    out += "manifest =\nseg_backend =\ndet_backend =\n\n";
    out += "; The sections below are optional. Their presence makes end-to-end\n";
    out += "; generate synthetic scenes first.\n";
    out += "[simulate]\n";
    out += "scenes = " + std::to_string(s.scenes) + "\n";
    out += "; calibrated or noiseless\nnoise = " + s.noise + "\n";
    out += "width = " + std::to_string(s.scene.width) + "\n";
    out += "height = " + std::to_string(s.scene.height) + "\n";
    out += "resolution_cm = " + fmt(s.scene.resolution_cm) + "\n";
    out += "n_aircraft = " + std::to_string(s.scene.n_aircraft) + "\n";
    out += "n_clusters = " + std::to_string(s.scene.n_clusters) + "\n";
    out += "cluster_spread = " + fmt(s.scene.cluster_spread) + "\n";
    out += "pair_fraction = " + fmt(s.scene.pair_fraction) + "\n";
    out += "min_length = " + std::to_string(s.scene.min_length) + "\n";
    out += "max_length = " + std::to_string(s.scene.max_length) + "\n";
    out += "write_image = " + fmt(s.write_image) + "\n\n";
    out += "[seg_noise]\n";
    write_noise(out, s.seg);
    out += "\n[det_noise]\n";
    write_noise(out, s.det);
    return out;
}

std::uint64_t scene_seed(std::uint64_t seed, int index) {
    return seed * 1000u + static_cast<std::uint64_t>(index);
}

Taxonomy load_taxonomy(const Config& config) {
    if (config.taxonomy.empty()) return Taxonomy::default_taxonomy();
    return Taxonomy::load_file(config.taxonomy);
}

}  // namespace aerofuse
