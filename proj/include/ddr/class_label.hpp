#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace ddr {

// The nine layout classes. The integer values are the category ids written
// to manifests and must never be renumbered.
enum class ClassLabel : int {
  kAbstract = 0,
  kAlgorithm = 1,
  kAuthor = 2,
  kBodyText = 3,
  kCaption = 4,
  kEquation = 5,
  kFigure = 6,
  kTable = 7,
  kTitle = 8,
};

inline constexpr int kNumClasses = 9;

inline constexpr std::array<ClassLabel, kNumClasses> kAllClasses = {
    ClassLabel::kAbstract, ClassLabel::kAlgorithm, ClassLabel::kAuthor,
    ClassLabel::kBodyText, ClassLabel::kCaption,   ClassLabel::kEquation,
    ClassLabel::kFigure,   ClassLabel::kTable,     ClassLabel::kTitle,
};

constexpr int class_id(ClassLabel c) { return static_cast<int>(c); }

constexpr std::string_view class_name(ClassLabel c) {
  switch (c) {
    case ClassLabel::kAbstract: return "abstract";
    case ClassLabel::kAlgorithm: return "algorithm";
    case ClassLabel::kAuthor: return "author";
    case ClassLabel::kBodyText: return "body-text";
    case ClassLabel::kCaption: return "caption";
    case ClassLabel::kEquation: return "equation";
    case ClassLabel::kFigure: return "figure";
    case ClassLabel::kTable: return "table";
    case ClassLabel::kTitle: return "title";
  }
  return "?";
}

constexpr std::optional<ClassLabel> class_from_id(int id) {
  if (id < 0 || id >= kNumClasses) return std::nullopt;
  return static_cast<ClassLabel>(id);
}

constexpr std::optional<ClassLabel> class_from_name(std::string_view name) {
  for (ClassLabel c : kAllClasses) {
    if (class_name(c) == name) return c;
  }
  return std::nullopt;
}

// Classes whose content is pasted imagery rather than typeset text.
constexpr bool is_visual_class(ClassLabel c) {
  return c == ClassLabel::kFigure || c == ClassLabel::kTable ||
         c == ClassLabel::kAlgorithm || c == ClassLabel::kEquation;
}

}  // namespace ddr
