def avgWordLenght(words):
    totalLetters = 0
    for word in words:
        totalLetters += len(word)
    return totalLetters / len(words)
