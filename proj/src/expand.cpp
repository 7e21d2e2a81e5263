#include "irbench/expand.hpp"

#include "irbench/digest.hpp"
#include "irbench/errors.hpp"

namespace irbench {

std::array<std::string, 4> Permutation::apply(const std::array<std::string, 4>& canonical) const {
    std::array<std::string, 4> out;
    for (int i = 0; i < 4; ++i) out[(i + shift) & 3] = canonical[static_cast<std::size_t>(i)];
    return out;
}

std::vector<EvalTask> expand_item(const BenchmarkItem& item, InputMode mode,
                                  const std::string& prompt_digest) {
    std::vector<EvalTask> tasks;
    tasks.reserve(8);
    for (std::string_view lang : kLanguages) {
        for (int shift = 0; shift < 4; ++shift) {
            EvalTask t;
            t.item_id = item.id;
            t.shift = shift;
            t.language = std::string(lang);
            t.presented_options = Permutation{shift}.apply(item.options);
            t.correct_label = static_cast<char>('A' + ((item.answer_index + shift) & 3));
            t.mode = mode;
            t.question = item.question.at(t.language);
            t.image = item.image;
            t.dimension = item.dimension;
            t.task_id = short_digest(item.id + '\x1f' + std::to_string(shift) + '\x1f' +
                                     t.language + '\x1f' + std::string(mode_code(mode)) + '\x1f' +
                                     prompt_digest);
            tasks.push_back(std::move(t));
        }
    }
    return tasks;
}

std::vector<EvalTask> expand_benchmark(const Benchmark& b, InputMode mode,
                                       const std::string& prompt_digest) {
    std::vector<EvalTask> tasks;
    tasks.reserve(b.items.size() * 8);
    for (const auto& item : b.items) {
        auto expanded = expand_item(item, mode, prompt_digest);
        tasks.insert(tasks.end(), std::make_move_iterator(expanded.begin()),
                     std::make_move_iterator(expanded.end()));
    }
    return tasks;
}

MessagePayload render_prompt(const EvalTask& task, const PromptSet& prompts) {
    MessagePayload p;
    p.task_id = task.task_id;
    p.system_text = prompts.eval_system(task.language, mode_dual_image(task.mode));
    if (mode_needs_prior(task.mode)) {
        p.system_text += "\n\n";
        p.system_text += prompts.prior(task.language);
    }

    std::string user = task.question;
    user += '\n';
    for (int i = 0; i < 4; ++i) {
        user += static_cast<char>('A' + i);
        user += ". ";
        user += task.presented_options[static_cast<std::size_t>(i)];
        user += '\n';
    }
    p.user_text = std::move(user);

    switch (task.mode) {
        case InputMode::IF:
        case InputMode::IF_TEXT: p.images = {ImageSlot{"ir", {}, "image/png"}}; break;
        case InputMode::RGB: p.images = {ImageSlot{"rgb", {}, "image/png"}}; break;
        case InputMode::IF_RGB:
        case InputMode::IF_RGB_TEXT:
            p.images = {ImageSlot{"ir", {}, "image/png"}, ImageSlot{"rgb", {}, "image/png"}};
            break;
    }
    return p;
}

}  // namespace irbench
