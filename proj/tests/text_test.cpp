#include <gtest/gtest.h>

#include "optree/text.hpp"

using namespace optree;

TEST(Stem, SuffixRules) {
    EXPECT_EQ(stem("running"), "run");
    EXPECT_EQ(stem("played"), "play");
    EXPECT_EQ(stem("songs"), "song");
    EXPECT_EQ(stem("parties"), "parti");
    EXPECT_EQ(stem("party"), "parti");
    EXPECT_EQ(stem("movies"), stem("movie"));
    EXPECT_EQ(stem("stories"), stem("story"));
    EXPECT_EQ(stem("monday"), "monday");
    EXPECT_EQ(stem("classes"), "class");
    EXPECT_EQ(stem("swimming"), "swim");
    EXPECT_EQ(stem("meetings"), "meet");
    EXPECT_EQ(stem("bus"), "bus");
    EXPECT_EQ(stem("grass"), "grass");
    EXPECT_EQ(stem("sing"), "sing");
}

TEST(Tokenize, SplitsLowercasesAndStems) {
    EXPECT_EQ(tokenize("I went Running, played_football!"),
              (std::vector<std::string>{"i", "went", "run", "play", "football"}));
    EXPECT_EQ(tokenize("price: 5.99 EUR"), (std::vector<std::string>{"price", "5", "99", "eur"}));
    EXPECT_EQ(tokenize("Caf\xc3\xa9 visit"), (std::vector<std::string>{"caf\xc3\xa9", "visit"}));
    EXPECT_TRUE(tokenize(" ,;- ").empty());
}

TEST(Tokenize, ContentTokensDropStopwords) {
    EXPECT_EQ(content_tokens("How many times did I play football with my friends?"),
              (std::vector<std::string>{"time", "play", "football", "friend"}));
    EXPECT_TRUE(content_tokens("the a of").empty());
}
