#include <algorithm>
#include <numeric>

#include "aa/baseline.hpp"
#include "aa/common/error.hpp"
#include "aa/common/rng.hpp"
#include "aa/common/text.hpp"

namespace aa {

BaselineSession::BaselineSession(Dataset dataset, std::uint64_t seed, Clock clock)
    : dataset_(std::move(dataset)), seed_(seed), log_(std::move(clock)) {}

BaselineSession BaselineSession::create(Dataset dataset, std::uint64_t seed, const labeling::Resources& res,
                                        Clock clock, nlohmann::json meta) {
  if (dataset.size() == 0) throw Error(ErrorCode::kPrecondition, "dataset is empty");
  BaselineSession s(std::move(dataset), seed, std::move(clock));
  s.meta_ = std::move(meta);
  const std::size_t n = s.dataset_.size();
  s.precomputed_.reserve(n);
  for (const auto& u : s.dataset_.items()) {
    const auto t = labeling::sentence_triplet(u.text, res);
    s.precomputed_.push_back(labeling::label_from_triplets(std::span(&t, 1)).canonical);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 0xBA5Eu));
  rng.shuffle(order);
  s.queue_.assign(order.begin(), order.end());
  s.row_labels_.assign(n, std::nullopt);
  s.log_.append(EventKind::kBaselineCreated, {{"seed", seed}, {"dataset_size", n}, {"meta", s.meta_}});
  return s;
}

std::map<std::string, std::size_t> BaselineSession::label_histogram() const {
  std::map<std::string, std::size_t> h;
  for (const auto& l : row_labels_) {
    if (l) ++h[*l];
  }
  return h;
}

std::optional<BaselineItem> BaselineSession::next_item() {
  if (active_) return active_;
  if (queue_.empty()) return std::nullopt;
  const std::size_t row = queue_.front();
  active_ = BaselineItem{row, precomputed_[row]};
  log_.append(EventKind::kBaselineItem, {{"id", dataset_[row].id}, {"label", precomputed_[row]}});
  return active_;
}

void BaselineSession::respond(const BaselineResponse& response) {
  if (!active_) throw Error(ErrorCode::kConflict, "no active baseline item");
  const std::size_t row = active_->row;
  const auto& id = dataset_[row].id;
  switch (response.kind) {
    case BaselineResponse::Kind::kConfirm:
      row_labels_[row] = active_->precomputed_label;
      queue_.pop_front();
      log_.append(EventKind::kBaselineConfirm, {{"id", id}, {"label", *row_labels_[row]}});
      break;
    case BaselineResponse::Kind::kRelabel: {
      auto label = text::normalize_label(response.label);
      if (label.empty()) throw Error(ErrorCode::kInvalidArgument, "label must not be empty");
      row_labels_[row] = std::move(label);
      queue_.pop_front();
      log_.append(EventKind::kBaselineRelabel, {{"id", id}, {"label", *row_labels_[row]}});
      break;
    }
    case BaselineResponse::Kind::kSkip:
      queue_.pop_front();
      queue_.push_back(row);
      log_.append(EventKind::kBaselineSkip, {{"id", id}});
      break;
  }
  active_.reset();
}

std::vector<LabelledRow> BaselineSession::export_labels() const {
  std::vector<LabelledRow> rows;
  for (std::size_t r = 0; r < row_labels_.size(); ++r) {
    if (row_labels_[r]) rows.push_back({dataset_[r].id, dataset_[r].text, *row_labels_[r]});
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return rows;
}

nlohmann::json BaselineSession::state_json() const {
  nlohmann::json j;
  j["mode"] = "baseline";
  j["seed"] = seed_;
  j["version"] = version();
  j["meta"] = meta_;
  nlohmann::json labelled = nlohmann::json::object();
  for (const auto& row : export_labels()) labelled[row.id] = row.label;
  j["labelled"] = labelled;
  std::vector<std::string> queue;
  for (auto r : queue_) queue.push_back(dataset_[r].id);
  j["queue"] = queue;
  j["active"] = active_ ? nlohmann::json{{"id", dataset_[active_->row].id}, {"label", active_->precomputed_label}}
                        : nlohmann::json(nullptr);
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : log_.events()) events.push_back(event_to_json(e));
  j["events"] = events;
  return j;
}

BaselineSession BaselineSession::replay(Dataset dataset, const std::vector<AnnotationEvent>& log,
                                        const labeling::Resources& res) {
  if (log.empty() || log.front().kind != EventKind::kBaselineCreated) {
    throw Error(ErrorCode::kReplayMismatch, "event log must start with BaselineCreated");
  }
  const auto& created = log.front().payload;
  BaselineSession s = create(std::move(dataset), created.at("seed").get<std::uint64_t>(), res, recorded_clock(log),
                             created.value("meta", nlohmann::json::object()));
  auto mismatch = [](std::uint64_t seq, const std::string& what) {
    return Error(ErrorCode::kReplayMismatch, "event " + std::to_string(seq) + ": " + what);
  };
  if (s.events().front() != log.front()) throw mismatch(0, "session setup differs from the log");
  while (s.version() < log.size()) {
    const auto start = s.version();
    const auto& e = log[start];
    try {
      switch (e.kind) {
        case EventKind::kBaselineItem: s.next_item(); break;
        case EventKind::kBaselineConfirm: s.respond(BaselineResponse::confirm()); break;
        case EventKind::kBaselineRelabel:
          s.respond(BaselineResponse::relabel(e.payload.at("label").get<std::string>()));
          break;
        case EventKind::kBaselineSkip: s.respond(BaselineResponse::skip()); break;
        default: throw mismatch(e.seq, std::string("unexpected ") + event_kind_name(e.kind));
      }
    } catch (const nlohmann::json::exception& ex) {
      throw mismatch(e.seq, ex.what());
    } catch (const Error& ex) {
      if (ex.code() == ErrorCode::kReplayMismatch) throw;
      throw mismatch(e.seq, ex.what());
    }
    if (s.version() == start) throw mismatch(e.seq, "action produced no event");
    for (auto i = start; i < s.version(); ++i) {
      if (s.events()[i] != log[i]) throw mismatch(i, "regenerated event differs from the log");
    }
  }
  return s;
}

}  // namespace aa
