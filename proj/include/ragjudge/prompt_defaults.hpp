// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

// Shipped default prompt bodies. The files under templates/ carry the same
// text and may be edited; these are used when no file overrides them.
namespace ragjudge::prompts::defaults {

inline constexpr std::string_view kStatementExtraction = R"PROMPT(Given a question, an answer, and sentences from the answer analyze the complexity of each sentence given under 'sentences' and break down each sentence into one or more fully understandable statements while also ensuring no pronouns are used in each statement. Format the output of the statements as a list with hyphens

Examples: [
    {
        "question": "Who was Albert Einstein and what is he best known for?",
        "answer": "He was a German-born theoretical physicist, widely acknowledged to be one of the greatest and most influential physicists of all time. He was best known for developing the theory of relativity, he also made important contributions to the development of the theory of quantum mechanics.",
        "sentences": "
        0:He was a German-born theoretical physicist, widely acknowledged to be one of the greatest and most influential physicists of all time.
        1:He was best known for developing the theory of relativity, he also made important contributions to the development of the theory of quantum mechanics. ",
        "statements": "
        - Albert Einstein was a German-born theoretical physicist.
        - Albert Einstein is recognized as one of the greatest and most influential physicists of all time.
        - Albert Einstein was best known for developing the theory of relativity.
        - Albert Einstein also made important contributions to the development of the theory of quantum mechanics. "
    }
],


Question: {question}

Answer: {answer}

Sentences: {sentences}


You need to output only the list of statements with hyphens. There can also be answers that contain only 1 statement. If you cannot find more than 1 statement, then just print the original answer with a hyphen.
)PROMPT";

inline constexpr std::string_view kCorrectnessVerdict = R"PROMPT(Given a set of ground truth statements and a set of answer statements, analyze each statement and classify them in one of the following categories:

- TP (true positive): statements that are present in answer that are also supported by one or more statements in ground truth,

- FP (false positive): statements that are present in answer and that are not supported by any statements in ground truth,

- FN (false negative): statements that are present in the ground truth, but they are not supporting any statements in the answer.

Each statement can only belong to one of the categories. TP and FP are directly related to answer statements and FN directly related to ground truth statements. If a ground truth statement is supporting an answer statement, that statement can NEVER be an FN so avoid classifying it.


Examples:
    [
    {
        "question": "What powers the sun and what is its primary function?",
        "statements answers": "
        - The sun is powered by nuclear fission, similar to nuclear reactors on Earth.
        - The primary function of the sun is to provide light to the solar system. ",
        "ground_truth": "
        - The sun is powered by nuclear fusion, where hydrogen atoms fuse to form helium.
        - This fusion process in the sun's core releases a tremendous amount of energy.
        - The energy from the sun provides heat and light, which are essential for life on Earth.
        - The sun's light plays a critical role in Earth's climate system.
        - Sunlight helps to drive the weather and ocean currents. ",

        "classification": "
        - The primary function of the sun is to provide light to the solar system. This statement is somewhat supported by the ground truth mentioning the sun providing light and its roles, though it focuses more broadly on the sun's energy. VERDICT: TP,
        - The sun is powered by nuclear fission, similar to nuclear reactors on Earth. This statement is incorrect and contradicts the ground truth which states that the sun is powered by nuclear fusion. VERDICT: FP,
        - The sun is powered by nuclear fusion, where hydrogen atoms fuse to form helium. This accurate description of the sun’s power source is not included in the answer. VERDICT: FN
        - This fusion process in the sun's core releases a tremendous amount of energy. This process and its significance are not mentioned in the answer. VERDICT: FN
        - The energy from the sun provides heat and light, which are essential for life on Earth. The answer only mentions light, omitting the essential aspects of heat and its necessity for life, which the ground truth covers. VERDICT: FN
        - The sun's light plays a critical role in Earth's climate system. This broader impact of the sun’s light on Earth's climate system is not addressed in the answer. VERDICT: FN
        - Sunlight helps to drive the weather and ocean currents. The effect of sunlight on weather patterns and ocean currents is omitted in the answer. VERDICT: FN"
    },

    {
        "question": "What is the boiling point of water?",
        "statements answers": "
        - The boiling point of water is 100 degrees Celsius at sea level ",
        "statements ground_truth": "
        - The boiling point of water is 100 degrees Celsius (212 degrees Fahrenheit) at sea level.
        - The boiling point of water can change with altitude.",
        "classification": "
        - The boiling point of water is 100 degrees Celsius at sea level. This statement is directly supported by the ground truth which specifies the boiling point of water as 100 degrees Celsius at sea level. VERDICT: TP,
        - The boiling point of water can change with altitude. This additional information about how the boiling point of water can vary with altitude is not mentioned in the answer. VERDICT: FN
        - The boiling point of water is 100 degrees Celsius (212 degrees Fahrenheit) at sea level. No need to label it because it is a ground truth statement that supports a statement from the answer. "
    },

    {
        "question": "Which actor is playing Han Solo in the original Star Wars?",
        "statements answers": "
        - Han Solo is played by the American actor Harrison Ford.",
        "statements ground_truth":
        "
        - Harrison Ford ",
        "classification": "
        - Han Solo is played by the American actor Harrison Ford. This statement is directly supported by the ground which mentions Harrison Ford. VERDICT: TP
        - Harrison Ford. No need to label it because it is a ground truth statement that supports a statement from the answer.
        "
    }

    ]

Given the question and the statements, evaluate the input from below:


Question: {question}

Statements answer: {statements_answer}

Statements ground_truth: {statements_groundtruth}

FP statements can be found only in the answer and FN statements can be found only in the ground truth. Remeber that if a statement is not present in the ground truth, then that is an FP not an FN!  If a ground truth statement is supporting an answer statement, that ground truth statement can NEVER be an FN so you no longer need to classify it. You don't need to look for the exact formulation of a ground truth statement inside an answer statement. Ground truth statements can be present inside an answer statement, but formulated in a different way and using different words (follow the examples I showed you above). Respect the structure of how you can give a verdict: [VERDICT: TP/FP/FN]
)PROMPT";

inline constexpr std::string_view kFaithfulnessVerdict = R"PROMPT(Your task is to judge the faithfulness of a series of statements based on a given context. For each statement you must return verdict as PASSED if the statement can be directly inferred based on the context or FAILED if the statement can not be directly inferred based on the context.

Examples:  [
    {
        "context":
        "John is a student at XYZ University. He is pursuing a degree in Computer Science. He is enrolled in several courses this semester, including Data Structures, Algorithms, and Database Management. John is a diligent student and spends a significant amount of time studying and completing assignments. He often stays late in the library to work on his projects.",
        "statements": "
        - John is majoring in Biology.,
        - John is taking a course on Artificial Intelligence.,
        - John is a dedicated student.,
        - John has a part-time job.",
        "answer": "
        - John is majoring in Biology. John's major is explicitly mentioned as Computer Science. There is no information suggesting he is majoring in Biology. VERDICT: FAILED
        - John is taking a course on Artificial Intelligence.The context mentions the courses John is currently enrolled in, and Artificial Intelligence is not mentioned. Therefore, it cannot be deduced that John is taking a course on AI. VERDICT: FAILED"
        - John is a dedicated student. The context states that he spends a significant amount of time studying and completing assignments. Additionally, it mentions that he often stays late in the library to work on his projects, which implies dedication. VERDICT: PASSED
        - John has a part-time job. There is no information given in the context about John having a part-time job. VERDICT: FAILED "
    },
    {
        "context": "Photosynthesis is a process used by plants, algae, and certain bacteria to convert light energy into chemical energy.",
        "statements":
        "-Albert Einstein was a genius.",
        "answer": "
        - Albert Einstein was a genius. The context and statement are unrelated. VERDICT: FAILED "
    }


Context: {context}
Statements: {statements}

Include PASSED or FAILED only when you label a statement. Do not count, just label the statements. If something is not mentioned in the provided context, then it should be marked with FAILED. Every statements from the list provided needs to be evaluated. Respect the structure of how you can give a verdict to a statement: [VERDICT: PASSED/FAILED]
)PROMPT";

inline constexpr std::string_view kConstrainedParseCorrectness = R"PROMPT(Given a set of statments that were labeled with either TP, FP or FN,  append the statement to the correct list. If a statement was labeled with TP tag, the statement should be appended to the TP list. If it was labeled with the FP tag, the statement should be in the FP list. If it was labeled with the FN tag, the statement should be in the FN list. I will provide you an example.

Example:

 [
    {
        "classified_statements": "
        - Statement1 VERDICT: TP
        - Statement2 VERDICT: TP
        - Statement3 VERDICT: TP
        - Statement4 VERDICT: FN
        - Statement5 VERDICT: FP
        - Statement6 VERDICT: FN
        ",
        "output": "
        {
        TP=[Statement1, Statement2, Statement3],
        FP=[Statement5],
        FN=[Statement4, Statement6]
        } "
    },

    {
        "classified_statements": "
        - Statement1 VERDICT: FP
        - Statement2 VERDICT: TP
        - Statement3 VERDICT: FN
        ",
        "output": "
        {
        TP=[Statement2],
        FP=[Statement1],
        FN=[Statement3]
        }
        "
    },

    {
        "classified_statements": "
        - Statement1 VERDICT: FN
        - Statement2 VERDICT: FP
        - Statement3 VERDICT: TP
        ",
        "output": "
        {
        TP=[Statement3],
        FP=[Statement2],
        FN=[Statement1]
        }
        "
    }
]

Statements: {statements}

 Your task is only to put the number of the statements in the correct list. Sometimes the input you will receive will not be the same like the example, but try as best as you can to fulfill the task correctly.
)PROMPT";

inline constexpr std::string_view kConstrainedParseFaithfulness = R"PROMPT(Given a set of statments that were labeled with either PASSED OR FAILED,  append the statement to the correct list. If a statement was labeled with PASSED tag, the statement should be appended to the PASSED list. If it was labeled with the FAILED tag, the statement should be in the FAILED list. I will provide you an example.

Examples:


Example 1:
- Statement1 VERDICT: FAILED
- Statement2 VERDICT: PASSED
- Statement3 VERDICT: PASSED
- Statement4 VERDICT: FAILED
Output:
{
PASSED: [Statement2, Statement3]
FAILED: [Statement1, Statement4]
}

Example 2:
- Statement1 VERDICT: PASSED
- Statement2 VERDICT: PASSED
- Statement3 VERDICT: FAILED
- Statement4 VERDICT: PASSED
- Statement5 VERDICT: FAILED
Output:
{
PASSED: [Statement1, Statement2, Statement4]
FAILED: [Statement3, Statement5]
}

Statements : {statements}

Your task is only to put the number of the statements in the correct list. Sometimes the input you will receive will not respect strictly the example, but try as best as you can to fulfill the task correctly.
)PROMPT";

}  // namespace ragjudge::prompts::defaults
