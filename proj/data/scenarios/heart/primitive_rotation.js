function initializeParams() {
    return {
        heartPositionX: Math.floor(ShapeDisplay.grid_x / 2),
        heartPositionY: Math.floor(ShapeDisplay.grid_y / 2),
        heartScale: 7,
        heartHeight: 50,
        heartRotation: 0, // radians, counter-clockwise
    };
}

function insideHeart(x, y) {
    const a = x * x + y * y - 1;
    return a * a * a - x * x * y * y * y <= 0;
}

function dynamicScript(deltaTime, params) {
    const { heartPositionX, heartPositionY, heartScale, heartHeight, heartRotation } = params;
    if (heartScale <= 0) return;
    const c = Math.cos(heartRotation);
    const s = Math.sin(heartRotation);
    ShapeDisplay.Pins.forEach((pin, index) => {
        const dx = ((index % ShapeDisplay.grid_x) - heartPositionX) / heartScale;
        const dy = -(Math.floor(index / ShapeDisplay.grid_x) - heartPositionY) / heartScale;
        const x = dx * c + dy * s;
        const y = -dx * s + dy * c;
        if (insideHeart(x * 1.2, y * 1.2 + 0.2)) {
            pin.setPos(heartHeight);
        }
    });
}
