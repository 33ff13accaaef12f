// Defines initial setup values such as scale, position, rotation, and height of the square
function initializeParams() {
    return {
        squareScale: 0.5, // Scale factor for the square size relative to the display grid
        squarePosX: Math.floor(ShapeDisplay.grid_x / 2), // X position of the square's center
        squarePosY: Math.floor(ShapeDisplay.grid_y / 2), // Y position of the square's center
        squareRotation: 0, // Initial rotation angle of the square
        squareHeight: 25, // Height of the square pins
    };
}

// Calculates the new position of a point after rotation around the origin
function calculateRotatedPosition(x, y, rotation) {
    return {
        rotatedX: x * Math.cos(-rotation) - y * Math.sin(-rotation), // X coordinate after rotation
        rotatedY: x * Math.sin(-rotation) + y * Math.cos(-rotation), // Y coordinate after rotation
    };
}

// Determines if a point is within the defined square boundaries after rotation
function checkInBounds(rotatedX, rotatedY, maxDimension_x, maxDimension_y) {
    return (
        rotatedX >= -maxDimension_x / 2 &&
        rotatedX <= maxDimension_x / 2 &&
        rotatedY >= -maxDimension_y / 2 &&
        rotatedY <= maxDimension_y / 2
    );
}

// Main function to orchestrate the dynamic script
// Uses initialized parameters to set the display according to the square pattern
function dynamicScript(deltaTime, params) {
    const {
        squareScale,
        squarePosX,
        squarePosY,
        squareRotation,
        squareHeight,
    } = params;
    const maxDimension_x = ShapeDisplay.grid_x * squareScale; // Max width of the square
    const maxDimension_y = ShapeDisplay.grid_y * squareScale; // Max height of the square

    // Iterate over all pins to set their positions based on the square pattern
    ShapeDisplay.Pins.forEach((pin, index) => {
        let x = (index % ShapeDisplay.grid_x) - squarePosX;
        let y = Math.floor(index / ShapeDisplay.grid_x) - squarePosY;

        // Calculate rotated position for each pin
        const { rotatedX, rotatedY } = calculateRotatedPosition(
            x,
            y,
            squareRotation
        );

        // Check if the point falls within the bounds and set pin height if true
        if (checkInBounds(rotatedX, rotatedY, maxDimension_x, maxDimension_y)) {
            pin.setPos(squareHeight);
        }
    });
