def avgWordLength(words):
    for word in words:
        totalLetters += len(word)
    totalLetters / len(words)
