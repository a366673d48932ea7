#include "aerofuse/archspec.hpp"

#include "aerofuse/ini.hpp"

#include <numeric>
#include <sstream>

namespace aerofuse::arch {

namespace {

std::vector<int> even_split(int total, int parts) {
    if (parts <= 0) return {};
    std::vector<int> out(static_cast<std::size_t>(parts), total / parts);
    for (int i = 0; i < total % parts; ++i) ++out[static_cast<std::size_t>(i)];
    return out;
}

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

void check_partition(const std::vector<int>& partition, int expected_parts, int expected_total,
                     const std::string& field, std::vector<Violation>& out) {
    if (partition.empty()) return;
    if (static_cast<int>(partition.size()) != expected_parts) {
        out.push_back({field, "must list " + std::to_string(expected_parts) +
                                  " stages (one per resolution)"});
        return;
    }
    for (int blocks : partition) {
        if (blocks < 0) {
            out.push_back({field, "block counts must be non-negative"});
            return;
        }
    }
    if (std::accumulate(partition.begin(), partition.end(), 0) != expected_total) {
        out.push_back({field, "must sum to " + std::to_string(expected_total)});
    }
}

}  // namespace

std::vector<int> UNetSpec::resolved_encoder_partition() const {
    if (!encoder_partition.empty()) return encoder_partition;
    return even_split(encoder_im_blocks, downsample_count + 1);
}

std::vector<int> UNetSpec::resolved_decoder_partition() const {
    if (!decoder_partition.empty()) return decoder_partition;
    return even_split(decoder_im_blocks, downsample_count);
}

std::vector<Violation> validate(const UNetSpec& spec) {
    std::vector<Violation> v;
    if (spec.input_size <= 0) v.push_back({"input_size", "must be positive"});
    if (spec.input_channels <= 0) v.push_back({"input_channels", "must be positive"});
    if (spec.base_filters <= 0) v.push_back({"base_filters", "must be positive"});
    if (spec.downsample_count < 1) v.push_back({"downsample_count", "must be >= 1"});
    if (spec.encoder_im_blocks <= 0) v.push_back({"encoder_im_blocks", "must be positive"});
    if (spec.decoder_im_blocks <= 0) v.push_back({"decoder_im_blocks", "must be positive"});
    if (spec.num_classes < 1) v.push_back({"num_classes", "must be >= 1"});
    if (spec.downsample_count >= 1 && spec.input_size > 0 && spec.downsample_count < 31 &&
        spec.input_size % (1 << spec.downsample_count) != 0) {
        v.push_back({"input_size", "must be divisible by 2^downsample_count"});
    }
    if (spec.downsample_count >= 1) {
        check_partition(spec.encoder_partition, spec.downsample_count + 1,
                        spec.encoder_im_blocks, "encoder_partition", v);
        check_partition(spec.decoder_partition, spec.downsample_count, spec.decoder_im_blocks,
                        "decoder_partition", v);
    }
    return v;
}

std::vector<Violation> validate(const RetinaSpec& spec) {
    std::vector<Violation> v;
    if (spec.backbone_name.empty()) v.push_back({"backbone_name", "must not be empty"});
    if (spec.pyramid_strides.empty()) v.push_back({"pyramid_strides", "must list at least one level"});
    for (std::size_t i = 0; i < spec.pyramid_strides.size(); ++i) {
        const int s = spec.pyramid_strides[i];
        if (!is_power_of_two(s)) {
            v.push_back({"pyramid_strides", "stride not power of two: " + std::to_string(s)});
        }
        if (i > 0 && s <= spec.pyramid_strides[i - 1]) {
            v.push_back({"pyramid_strides", "strides must be strictly increasing"});
        }
    }
    if (spec.anchors_per_location < 1) v.push_back({"anchors_per_location", "must be >= 1"});
    if (spec.num_classes < 1) v.push_back({"num_classes", "must be >= 1"});
    if (!(spec.nms_threshold >= 0.0 && spec.nms_threshold <= 1.0)) {
        v.push_back({"nms_threshold", "must be in [0, 1]"});
    }
    return v;
}

ShapeTrace propagate_unet(const UNetSpec& spec) {
    const auto violations = validate(spec);
    if (!violations.empty()) {
        throw ArchError("invalid U-Net spec: " + violations.front().field + " " +
                        violations.front().rule);
    }
    const auto enc = spec.resolved_encoder_partition();
    const auto dec = spec.resolved_decoder_partition();

    ShapeTrace t;
    int size = spec.input_size;
    int filters = spec.base_filters;
    t.push_back({"input", StageKind::Input, size, size, spec.input_channels, 0});
    t.push_back({"encoder_0", StageKind::ImBlocks, size, size, filters, enc[0]});

    std::vector<int> skip_channels{filters};
    for (int level = 1; level <= spec.downsample_count; ++level) {
        size /= 2;
        filters *= 2;
        t.push_back({"down_" + std::to_string(level), StageKind::Downsample, size, size, filters, 0});
        t.push_back({"encoder_" + std::to_string(level), StageKind::ImBlocks, size, size, filters,
                     enc[static_cast<std::size_t>(level)]});
        skip_channels.push_back(filters);
    }

    for (int level = spec.downsample_count - 1, d = 0; level >= 0; --level, ++d) {
        size *= 2;
        filters /= 2;
        const auto tag = std::to_string(d + 1);
        t.push_back({"up_" + tag, StageKind::Upsample, size, size, filters, 0});
        t.push_back({"skip_concat_" + tag, StageKind::SkipConcat, size, size,
                     filters + skip_channels[static_cast<std::size_t>(level)], 0});
        t.push_back({"decoder_" + tag, StageKind::ImBlocks, size, size, filters,
                     dec[static_cast<std::size_t>(d)]});
    }
    t.push_back({"head", StageKind::Head, size, size, spec.num_classes, 0});
    return t;
}

int count_stages(const ShapeTrace& trace, StageKind kind) {
    int n = 0;
    for (const auto& s : trace) n += s.kind == kind ? 1 : 0;
    return n;
}

std::vector<std::uint64_t> anchors_per_level(const RetinaSpec& spec, int image_size) {
    const auto violations = validate(spec);
    if (!violations.empty()) {
        throw ArchError("invalid RetinaNet spec: " + violations.front().field + " " +
                        violations.front().rule);
    }
    if (image_size <= 0) throw ArchError("image size must be positive");
    std::vector<std::uint64_t> out;
    for (int stride : spec.pyramid_strides) {
        if (image_size % stride != 0) {
            throw ArchError("image size " + std::to_string(image_size) +
                            " is not divisible by stride " + std::to_string(stride));
        }
        const auto cells = static_cast<std::uint64_t>(image_size / stride);
        out.push_back(cells * cells * static_cast<std::uint64_t>(spec.anchors_per_location));
    }
    return out;
}

std::uint64_t anchor_count(const RetinaSpec& spec, int image_size) {
    const auto levels = anchors_per_level(spec, image_size);
    return std::accumulate(levels.begin(), levels.end(), std::uint64_t{0});
}

ArchSpecFile parse_spec_file(std::string_view document) {
    const auto doc = ini::parse(document);
    ArchSpecFile out;
    for (const auto& [name, values] : doc.sections) {
        ini::SectionReader r(name, values);
        if (name == "unet") {
            UNetSpec s;
            r.read("input_size", s.input_size);
            r.read("input_channels", s.input_channels);
            r.read("base_filters", s.base_filters);
            r.read("downsample_count", s.downsample_count);
            r.read("encoder_im_blocks", s.encoder_im_blocks);
            r.read("decoder_im_blocks", s.decoder_im_blocks);
            r.read("num_classes", s.num_classes);
            r.read("encoder_partition", s.encoder_partition);
            r.read("decoder_partition", s.decoder_partition);
            r.finish();
            out.unet = s;
        } else if (name == "retina") {
            RetinaSpec s;
            r.read("backbone", s.backbone_name);
            r.read("pyramid_strides", s.pyramid_strides);
            r.read("anchors_per_location", s.anchors_per_location);
            r.read("num_classes", s.num_classes);
            r.read("nms_threshold", s.nms_threshold);
            r.finish();
            out.retina = s;
        } else {
            throw ini::IniError("unknown section [" + name + "] (expected [unet] or [retina])");
        }
    }
    return out;
}

std::string to_string(StageKind kind) {
    switch (kind) {
        case StageKind::Input: return "input";
        case StageKind::ImBlocks: return "im_blocks";
        case StageKind::Downsample: return "downsample";
        case StageKind::Upsample: return "upsample";
        case StageKind::SkipConcat: return "skip_concat";
        case StageKind::Head: return "head";
    }
    return "unknown";
}

std::string format_trace(const ShapeTrace& trace) {
    std::ostringstream os;
    for (const auto& s : trace) {
        os << s.name << "  " << s.height << "x" << s.width << "x" << s.channels;
        if (s.kind == StageKind::ImBlocks) os << "  (" << s.im_blocks << " IM blocks)";
        os << "\n";
    }
    return os.str();
}

}  // namespace aerofuse::arch
