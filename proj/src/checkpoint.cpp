#include "cosam/checkpoint.hpp"

#include "cosam/config.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cosam {

namespace {

constexpr char kMagic[8] = {'C', 'O', 'S', 'A', 'M', '0', '1', '\0'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kSectionConfig = 1;
constexpr std::uint32_t kSectionFingerprint = 2;
constexpr std::uint32_t kSectionRecommender = 3;
constexpr std::uint32_t kSectionSampler = 4;

void put_u32(std::string& buf, std::uint32_t v) {
    for (int k = 0; k < 4; ++k) buf.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

void put_u64(std::string& buf, std::uint64_t v) {
    for (int k = 0; k < 8; ++k) buf.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

void put_f32(std::string& buf, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(buf, bits);
}

void put_f64(std::string& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(buf, bits);
}

class Reader {
  public:
    Reader(const std::string& data, std::size_t pos, std::size_t end)
        : data_(data), pos_(pos), end_(end) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int k = 0; k < 4; ++k)
            v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + k])) << (8 * k);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int k = 0; k < 8; ++k)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + k])) << (8 * k);
        pos_ += 8;
        return v;
    }

    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }

    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }

    std::size_t remaining() const { return end_ - pos_; }

  private:
    void need(std::size_t count) const {
        if (pos_ + count > end_) throw std::runtime_error("checkpoint: truncated section");
    }
    const std::string& data_;
    std::size_t pos_;
    std::size_t end_;
};

} // namespace

void save_checkpoint(const std::string& path, const CheckpointData& data) {
    if (data.user_emb.size() != static_cast<std::size_t>(data.n) * data.d ||
        data.item_emb.size() != static_cast<std::size_t>(data.m) * data.d)
        throw std::invalid_argument("checkpoint: embedding sizes disagree with n/m/d");

    struct Section {
        std::uint32_t id;
        std::string payload;
    };
    std::vector<Section> sections;

    sections.push_back({kSectionConfig, data.config_text});

    std::string fp;
    put_u64(fp, data.fingerprint);
    sections.push_back({kSectionFingerprint, std::move(fp)});

    std::string rec;
    put_u32(rec, static_cast<std::uint32_t>(data.d));
    put_u32(rec, static_cast<std::uint32_t>(data.n));
    put_u32(rec, static_cast<std::uint32_t>(data.m));
    put_u32(rec, 0);
    for (double x : data.user_emb) put_f32(rec, static_cast<float>(x));
    for (double x : data.item_emb) put_f32(rec, static_cast<float>(x));
    sections.push_back({kSectionRecommender, std::move(rec)});

    if (data.has_sampler) {
        std::string sam;
        put_f64(sam, data.sampler_cfg.c1);
        put_f64(sam, data.sampler_cfg.c2);
        put_f64(sam, data.sampler_cfg.candidate_multiplier);
        put_u32(sam, static_cast<std::uint32_t>(data.sampler_cfg.l_max));
        put_u32(sam, 0);
        put_u64(sam, data.logits.size());
        for (double x : data.logits) put_f32(sam, static_cast<float>(x));
        sections.push_back({kSectionSampler, std::move(sam)});
    }

    std::string out;
    out.append(kMagic, 8);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(sections.size()));
    std::size_t offset = out.size() + sections.size() * 24;
    for (const Section& s : sections) {
        put_u32(out, s.id);
        put_u32(out, 0);
        put_u64(out, offset);
        put_u64(out, s.payload.size());
        offset += s.payload.size();
    }
    for (const Section& s : sections) out += s.payload;

    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw std::runtime_error("checkpoint: write to '" + path + "' failed");
}

CheckpointData load_checkpoint(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
    std::string blob((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

    if (blob.size() < 16 || std::memcmp(blob.data(), kMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic in '" + path + "'");
    Reader head(blob, 8, blob.size());
    const std::uint32_t version = head.u32();
    if (version != kVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    const std::uint32_t count = head.u32();
    if (blob.size() < 16 + static_cast<std::size_t>(count) * 24)
        throw std::runtime_error("checkpoint: truncated section table");

    struct Entry {
        std::uint32_t id;
        std::uint64_t offset, length;
    };
    std::vector<Entry> entries;
    Reader table(blob, 16, 16 + static_cast<std::size_t>(count) * 24);
    for (std::uint32_t s = 0; s < count; ++s) {
        Entry e{};
        e.id = table.u32();
        table.u32();
        e.offset = table.u64();
        e.length = table.u64();
        if (e.offset + e.length > blob.size())
            throw std::runtime_error("checkpoint: section extends past end of file");
        for (const Entry& prev : entries)
            if (prev.id == e.id)
                throw std::runtime_error("checkpoint: duplicate section id " + std::to_string(e.id));
        entries.push_back(e);
    }
    auto find = [&](std::uint32_t id) -> const Entry* {
        for (const Entry& e : entries)
            if (e.id == id) return &e;
        return nullptr;
    };

    CheckpointData data;

    const Entry* cfg = find(kSectionConfig);
    if (!cfg) throw std::runtime_error("checkpoint: missing config section");
    data.config_text = blob.substr(cfg->offset, cfg->length);

    const Entry* fp = find(kSectionFingerprint);
    if (!fp || fp->length != 8) throw std::runtime_error("checkpoint: missing fingerprint section");
    data.fingerprint = Reader(blob, fp->offset, fp->offset + fp->length).u64();

    const Entry* rec = find(kSectionRecommender);
    if (!rec) throw std::runtime_error("checkpoint: missing recommender section");
    Reader rr(blob, rec->offset, rec->offset + rec->length);
    data.d = static_cast<std::int32_t>(rr.u32());
    data.n = static_cast<std::int32_t>(rr.u32());
    data.m = static_cast<std::int32_t>(rr.u32());
    rr.u32();
    if (data.d < 1 || data.n < 0 || data.m < 0)
        throw std::runtime_error("checkpoint: bad recommender shape");
    const std::size_t want = (static_cast<std::size_t>(data.n) + data.m) * data.d;
    if (rr.remaining() != want * 4)
        throw std::runtime_error("checkpoint: recommender payload size mismatch");
    data.user_emb.resize(static_cast<std::size_t>(data.n) * data.d);
    data.item_emb.resize(static_cast<std::size_t>(data.m) * data.d);
    for (double& x : data.user_emb) x = rr.f32();
    for (double& x : data.item_emb) x = rr.f32();

    if (const Entry* sam = find(kSectionSampler)) {
        data.has_sampler = true;
        Reader sr(blob, sam->offset, sam->offset + sam->length);
        data.sampler_cfg.c1 = sr.f64();
        data.sampler_cfg.c2 = sr.f64();
        data.sampler_cfg.candidate_multiplier = sr.f64();
        data.sampler_cfg.l_max = static_cast<std::int32_t>(sr.u32());
        sr.u32();
        const std::uint64_t edges = sr.u64();
        if (sr.remaining() != edges * 4)
            throw std::runtime_error("checkpoint: sampler payload size mismatch");
        data.sampler_cfg.validate();
        data.logits.resize(edges);
        for (double& x : data.logits) x = sr.f32();
    }
    return data;
}

std::uint64_t dataset_fingerprint(const std::string& data_dir) {
    std::uint64_t h = 14695981039346656037ULL;
    for (const char* name : {"user_vocab.tsv", "item_vocab.tsv"}) {
        std::ifstream in(data_dir + "/" + name, std::ios::binary);
        if (!in)
            throw std::runtime_error("fingerprint: cannot open '" + data_dir + "/" + name + "'");
        char chunk[4096];
        while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
            for (std::streamsize k = 0; k < in.gcount(); ++k) {
                h ^= static_cast<unsigned char>(chunk[k]);
                h *= 1099511628211ULL;
            }
            if (!in) break;
        }
    }
    return h;
}

CheckpointData to_checkpoint(const TrainedModel& model, std::uint64_t fingerprint) {
    CheckpointData data;
    data.config_text = serialize_train_config(model.config);
    data.fingerprint = fingerprint;
    data.n = model.recommender.num_users();
    data.m = model.recommender.num_items();
    data.d = model.recommender.dim();
    data.user_emb = model.recommender.user_parameters();
    data.item_emb = model.recommender.item_parameters();
    if (model.sampler) {
        data.has_sampler = true;
        data.sampler_cfg = model.sampler->config();
        data.logits = model.sampler->logits();
    }
    return data;
}

TrainedModel restore_model(const CheckpointData& data, const SplitDataset& split,
                           std::uint64_t expected_fingerprint, int threads) {
    if (data.fingerprint != expected_fingerprint)
        throw std::runtime_error(
            "checkpoint: dataset fingerprint mismatch, this checkpoint was trained on "
            "different data");

    TrainedModel model;
    model.config = train_config_from_map(parse_config_text(data.config_text));
    model.config.threads = threads;
    model.graph = std::make_shared<InteractionGraph>(InteractionGraph::build(split.train));
    const InteractionGraph& g = *model.graph;
    if (g.num_users() != data.n || g.num_items() != data.m)
        throw std::runtime_error("checkpoint: graph shape does not match checkpoint");

    model.recommender = RecommenderModel::init(data.n, data.m, model.config.rec_cfg, 0);
    if (model.recommender.user_parameters().size() != data.user_emb.size() ||
        model.recommender.item_parameters().size() != data.item_emb.size())
        throw std::runtime_error("checkpoint: embedding shape does not match config echo");
    model.recommender.user_parameters() = data.user_emb;
    model.recommender.item_parameters() = data.item_emb;

    if (data.has_sampler) {
        model.sampler.emplace(g, data.sampler_cfg);
        if (model.sampler->logits().size() != data.logits.size())
            throw std::runtime_error("checkpoint: logit count does not match the train graph");
        model.sampler->set_logits(data.logits);
    }
    return model;
}

} // namespace cosam
