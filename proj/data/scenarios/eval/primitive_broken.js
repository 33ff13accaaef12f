function initializeParams() {
    return { squareScale: 0.5, squarePosX: 12, squarePosY: 12, squareRotation: 0, squareHeight: 25 };
}
