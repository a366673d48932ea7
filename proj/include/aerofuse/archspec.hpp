#pragma once

/// @file archspec.hpp
/// @brief Declarative descriptors of the segmentation and detection networks.
///
/// No weights live here. The descriptors carry the structural choices
/// (depth, widths, pyramid levels, anchors) so that shapes and counts can be
/// checked without a deep-learning framework.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace aerofuse::arch {

class ArchError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Each identity-mapping block is two convolutions around a shortcut.
inline constexpr int kConvLayersPerImBlock = 2;

struct UNetSpec {
    int input_size = 512;
    int input_channels = 3;
    int base_filters = 64;
    /// Stride-2 convolutions on the encoder path (and transposed ones back).
    int downsample_count = 2;
    int encoder_im_blocks = 36;
    int decoder_im_blocks = 8;
    int num_classes = 2;
    /// IM blocks per encoder resolution (downsample_count + 1 entries).
    /// Empty means an even split of encoder_im_blocks.
    std::vector<int> encoder_partition;
    /// IM blocks per decoder resolution (downsample_count entries).
    std::vector<int> decoder_partition;

    std::vector<int> resolved_encoder_partition() const;
    std::vector<int> resolved_decoder_partition() const;
    int encoder_conv_layers() const { return encoder_im_blocks * kConvLayersPerImBlock; }
    int decoder_conv_layers() const { return decoder_im_blocks * kConvLayersPerImBlock; }
};

struct RetinaSpec {
    std::string backbone_name = "ResNet101";
    /// Strides of the pyramid levels. The default is P3..P7 (8..128) plus
    /// a stride-4 level for small objects.
    std::vector<int> pyramid_strides = {4, 8, 16, 32, 64, 128};
    int anchors_per_location = 9;
    int num_classes = 61;
    double nms_threshold = 0.35;
};

struct Violation {
    std::string field;
    std::string rule;

    friend bool operator==(const Violation&, const Violation&) = default;
};

std::vector<Violation> validate(const UNetSpec& spec);
std::vector<Violation> validate(const RetinaSpec& spec);

enum class StageKind { Input, ImBlocks, Downsample, Upsample, SkipConcat, Head };

struct ShapeStage {
    std::string name;
    StageKind kind = StageKind::Input;
    int height = 0;
    int width = 0;
    int channels = 0;
    int im_blocks = 0;
};

using ShapeTrace = std::vector<ShapeStage>;

/// Shape trace from input through encoder, bottleneck and decoder to the
/// per-class head. Throws ArchError on invariant violations or when the
/// input size is not divisible by 2^downsample_count.
ShapeTrace propagate_unet(const UNetSpec& spec);

int count_stages(const ShapeTrace& trace, StageKind kind);

/// Sum over pyramid levels of (image_size / stride)^2 * anchors_per_location.
std::uint64_t anchor_count(const RetinaSpec& spec, int image_size);
std::vector<std::uint64_t> anchors_per_level(const RetinaSpec& spec, int image_size);

struct ArchSpecFile {
    std::optional<UNetSpec> unet;
    std::optional<RetinaSpec> retina;
};

/// Parses an INI-style document with [unet] and/or [retina] sections.
/// Unknown sections or keys are rejected.
ArchSpecFile parse_spec_file(std::string_view document);

std::string to_string(StageKind kind);
std::string format_trace(const ShapeTrace& trace);

}  // namespace aerofuse::arch
