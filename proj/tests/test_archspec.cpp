#include "doctest.h"

#include "aerofuse/archspec.hpp"

using namespace aerofuse::arch;

TEST_CASE("default U-Net trace") {
    const UNetSpec s;
    const auto t = propagate_unet(s);
    CHECK(count_stages(t, StageKind::Downsample) == 2);
    CHECK(count_stages(t, StageKind::Upsample) == 2);
    CHECK(count_stages(t, StageKind::SkipConcat) == 2);
    CHECK(t.front().height == 512);
    CHECK(t.back().height == 512);
    CHECK(t.back().width == 512);
    CHECK(t.back().channels == s.num_classes);
    CHECK(s.encoder_conv_layers() == 72);
    CHECK(s.decoder_conv_layers() == 16);
    CHECK(s.resolved_encoder_partition() == std::vector<int>{12, 12, 12});
    CHECK(s.resolved_decoder_partition() == std::vector<int>{4, 4});
}

TEST_CASE("trace stage names are in pipeline order") {
    const auto t = propagate_unet(UNetSpec{});
    std::vector<std::string> names;
    for (const auto& s : t) names.push_back(s.name);
    CHECK(names == std::vector<std::string>{"input", "encoder_0", "down_1", "encoder_1", "down_2", "encoder_2", "up_1",
                                            "skip_concat_1", "decoder_1", "up_2", "skip_concat_2", "decoder_2", "head"});
}

TEST_CASE("skip connections concatenate channels") {
    const auto t = propagate_unet(UNetSpec{});
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i].kind != StageKind::SkipConcat) continue;
        // the upsampled tensor plus the encoder tensor at the same resolution
        const auto& up = t[i - 1];
        int enc_channels = 0;
        for (const auto& s : t) {
            if (s.kind == StageKind::ImBlocks && s.name.rfind("encoder_", 0) == 0 && s.height == up.height) enc_channels = s.channels;
        }
        CHECK(t[i].channels == up.channels + enc_channels);
        CHECK(t[i].height == up.height);
    }
}

TEST_CASE("U-Net validation and shape errors") {
    UNetSpec s;
    s.input_size = 510;
    CHECK_THROWS_AS(propagate_unet(s), ArchError);
    s = UNetSpec{};
    s.encoder_partition = {10, 10, 10};
    CHECK(!validate(s).empty());
    s = UNetSpec{};
    s.downsample_count = 0;
    CHECK(!validate(s).empty());
    CHECK(validate(UNetSpec{}).empty());
}

TEST_CASE("anchor counts") {
    const RetinaSpec r;
    CHECK(anchor_count(r, 512) == 196560);
    const auto levels = anchors_per_level(r, 512);
    REQUIRE(levels.size() == 6);
    CHECK(levels[0] == 147456);
    CHECK(levels[1] == 36864);
    RetinaSpec classic = r;
    classic.pyramid_strides = {8, 16, 32, 64, 128};
    CHECK(anchor_count(classic, 512) == 196560 - 147456);
}

TEST_CASE("retina validation") {
    RetinaSpec r;
    r.pyramid_strides = {4, 12};
    const auto v = validate(r);
    REQUIRE(!v.empty());
    CHECK(v[0].rule.find("power of two") != std::string::npos);
    CHECK(validate(RetinaSpec{}).empty());
}

TEST_CASE("spec files") {
    const auto f = parse_spec_file("[unet]\ninput_size = 256\n[retina]\npyramid_strides = 8,16\n");
    REQUIRE(f.unet);
    REQUIRE(f.retina);
    CHECK(f.unet->input_size == 256);
    CHECK(f.retina->pyramid_strides == std::vector<int>{8, 16});
    CHECK_THROWS(parse_spec_file("[unet]\nbogus = 1\n"));
    CHECK_THROWS(parse_spec_file("[other]\na = 1\n"));
    CHECK(!format_trace(propagate_unet(*f.unet)).empty());
}
